// Copyright 2026 The kdbalance Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kdb/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "kdb/error.hpp"

namespace kdb {
namespace {

double log_likelihood(const Vector& eta, const Vector& t) {
  double ll = 0.0;
  for (Index i = 0; i < eta.size(); ++i) {
    // log(1 + e^eta) computed without overflow.
    const double softplus = std::max(eta(i), 0.0) + std::log1p(std::exp(-std::abs(eta(i))));
    ll += t(i) * eta(i) - softplus;
  }
  return ll;
}

Vector logistic(const Vector& eta) {
  return eta.unaryExpr([](double v) {
    return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  });
}

void check_model(const PropensityModel& model, const Dataset& data) {
  if (model.fitted.size() != data.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "propensity model was fitted on different data");
  }
}

}  // namespace

PropensityModel fit_propensity_logistic(const Dataset& data, const LogisticOptions& options) {
  const Index n = data.size();
  const Index k = data.dim() + 1;
  Matrix design(n, k);
  design.col(0).setOnes();
  design.rightCols(k - 1) = data.x();
  const Vector& t = data.t();

  PropensityModel model;
  Vector beta = Vector::Zero(k);
  Vector eta = design * beta;
  double ll = log_likelihood(eta, t);
  model.log_likelihood.push_back(ll);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const Vector mu = logistic(eta);
    const Vector grad = design.transpose() * (t - mu);
    const Vector w = (mu.array() * (1.0 - mu.array())).matrix();
    Matrix hessian = design.transpose() * w.asDiagonal() * design;
    Eigen::LDLT<Matrix> ldlt(hessian);
    Vector step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      hessian.diagonal().array() += 1e-8 * std::max(1.0, hessian.diagonal().maxCoeff());
      step = hessian.ldlt().solve(grad);
    }
    // Under separation the gradient vanishes while Newton steps stay O(1),
    // so a small gradient alone is not convergence.
    if (grad.cwiseAbs().maxCoeff() <= options.gradient_tolerance * static_cast<double>(n) &&
        step.cwiseAbs().maxCoeff() <= 1e-6 * std::max(1.0, beta.cwiseAbs().maxCoeff())) {
      model.converged = true;
      break;
    }

    double scale = 1.0;
    Vector candidate = beta + step;
    Vector cand_eta = design * candidate;
    double cand_ll = log_likelihood(cand_eta, t);
    for (int halving = 0; halving < 40 && !(cand_ll >= ll); ++halving) {
      scale *= 0.5;
      candidate = beta + scale * step;
      cand_eta = design * candidate;
      cand_ll = log_likelihood(cand_eta, t);
    }
    ++model.iterations;
    if (!(cand_ll >= ll)) break;  // no ascent possible; keep the current iterate
    const bool improving = cand_ll > ll;
    beta = candidate;
    eta = cand_eta;
    ll = cand_ll;
    model.log_likelihood.push_back(ll);
    if (improving && beta.cwiseAbs().maxCoeff() > options.divergence_bound) {
      model.separation = true;
      break;
    }
  }

  model.coefficients = beta;
  model.fitted = logistic(eta).cwiseMax(options.clip).cwiseMin(1.0 - options.clip);
  return model;
}

BalanceWeights ipw_ate_weights(const PropensityModel& model, const Dataset& data) {
  check_model(model, data);
  const auto tr = data.treated();
  const auto co = data.control();
  const double nn = static_cast<double>(data.size());
  BalanceWeights w;
  w.scheme = WeightScheme::kIpwAte;
  w.p.resize(data.n1());
  w.q.resize(data.n0());
  for (std::size_t a = 0; a < tr.size(); ++a) w.p(static_cast<Index>(a)) = 1.0 / (nn * model.fitted(tr[a]));
  for (std::size_t b = 0; b < co.size(); ++b) {
    w.q(static_cast<Index>(b)) = 1.0 / (nn * (1.0 - model.fitted(co[b])));
  }
  w.p /= w.p.sum();
  w.q /= w.q.sum();
  return w;
}

BalanceWeights ipw_att_weights(const PropensityModel& model, const Dataset& data, bool normalize_control) {
  check_model(model, data);
  const auto co = data.control();
  const double n1 = static_cast<double>(data.n1());
  BalanceWeights w;
  w.scheme = WeightScheme::kIpwAtt;
  w.p = Vector::Constant(data.n1(), 1.0 / n1);
  w.q.resize(data.n0());
  for (std::size_t b = 0; b < co.size(); ++b) {
    const double e = model.fitted(co[b]);
    w.q(static_cast<Index>(b)) = e / (n1 * (1.0 - e));
  }
  if (normalize_control) w.q /= w.q.sum();
  return w;
}

BalanceWeights unadjusted_weights(const Dataset& data) {
  BalanceWeights w;
  w.scheme = WeightScheme::kUnadjusted;
  w.p = Vector::Constant(data.n1(), 1.0 / static_cast<double>(data.n1()));
  w.q = Vector::Constant(data.n0(), 1.0 / static_cast<double>(data.n0()));
  return w;
}

double oracle_ate(const Dataset& data) {
  if (!data.has_potential_outcomes()) {
    throw Error(ErrorCode::kMissingPotentialOutcomes, "oracle estimator needs both potential outcomes");
  }
  return data.y1()->mean() - data.y0()->mean();
}

double oracle_att(const Dataset& data) {
  if (!data.has_potential_outcomes()) {
    throw Error(ErrorCode::kMissingPotentialOutcomes, "oracle estimator needs both potential outcomes");
  }
  double acc = 0.0;
  for (Index i : data.treated()) acc += (*data.y1())(i) - (*data.y0())(i);
  return acc / static_cast<double>(data.n1());
}

}  // namespace kdb
