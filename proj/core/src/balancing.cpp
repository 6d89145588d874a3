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

#include "kdb/balancing.hpp"

#include <algorithm>
#include <cmath>

#include "kdb/error.hpp"

namespace kdb {
namespace {

void check_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must be finite and nonnegative");
  }
}

bool is_constant(const Eigen::Ref<const Vector>& v) {
  return v.size() == 0 || v.maxCoeff() == v.minCoeff();
}

/// One-dimensional feasibility of the first-moment rows.
void precheck_hull(const Dataset& data, const BalanceScheme& scheme) {
  if (scheme.moments != MomentConstraints::kFirstMoment || data.dim() != 1) return;
  const Vector x1 = data.treated_x().col(0);
  const Vector x0 = data.control_x().col(0);
  if (scheme.target == Target::kATT) {
    const double mean1 = x1.mean();
    if (mean1 < x0.minCoeff() || mean1 > x0.maxCoeff()) {
      throw Error(ErrorCode::kInfeasibleBalance, "treated mean lies outside the control covariate range");
    }
  } else if (x1.maxCoeff() < x0.minCoeff() || x0.maxCoeff() < x1.minCoeff()) {
    throw Error(ErrorCode::kInfeasibleBalance, "treated and control covariate ranges do not overlap");
  }
}

}  // namespace

BalanceProblem build_ate_problem(const Dataset& data, const BalanceScheme& scheme, Bandwidth bw) {
  return build_ate_problem(data, scheme, information_matrix(data, bw, 0.0));
}

BalanceProblem build_ate_problem(const Dataset& data, const BalanceScheme& scheme,
                                 const InformationMatrix& base) {
  if (scheme.target != Target::kATE) throw Error(ErrorCode::kSchemeMismatch, "scheme does not target the ATE");
  check_lambda(scheme.lambda);
  const Index n = data.size();
  const Index n1 = data.n1();
  if (base.k.rows() != n) throw Error(ErrorCode::kDimensionMismatch, "information matrix does not match data");

  Matrix q = base.k;
  q.diagonal().array() += scheme.lambda - base.lambda;

  std::vector<Index> moment_rows;
  std::vector<Index> dropped;
  std::vector<std::string> warnings;
  if (scheme.moments == MomentConstraints::kFirstMoment) {
    for (Index d = 0; d < data.dim(); ++d) {
      if (is_constant(data.x().col(d))) {
        dropped.push_back(d);
        warnings.push_back("covariate " + std::to_string(d) + " is constant; moment row dropped");
      } else {
        moment_rows.push_back(d);
      }
    }
  }

  const Index m = 2 + static_cast<Index>(moment_rows.size());
  Matrix aeq = Matrix::Zero(m, n);
  Vector beq = Vector::Zero(m);
  aeq.row(0).head(n1).setOnes();
  aeq.row(1).tail(n - n1).setOnes();
  beq(0) = 1.0;
  beq(1) = 1.0;
  for (std::size_t r = 0; r < moment_rows.size(); ++r) {
    const Index d = moment_rows[r];
    for (Index b = 0; b < n; ++b) {
      const double v = data.x()(base.row_at[static_cast<std::size_t>(b)], d);
      aeq(2 + static_cast<Index>(r), b) = b < n1 ? v : -v;
    }
  }
  return BalanceProblem{QuadraticProgram(std::move(q), Vector::Zero(n), std::move(aeq), std::move(beq),
                                         std::vector<bool>(static_cast<std::size_t>(n), true)),
                        scheme, std::move(dropped), std::move(warnings)};
}

BalanceProblem build_att_problem(const Dataset& data, const BalanceScheme& scheme, Bandwidth bw) {
  return build_att_problem(data, scheme, information_matrix(data, bw, 0.0));
}

BalanceProblem build_att_problem(const Dataset& data, const BalanceScheme& scheme,
                                 const InformationMatrix& base) {
  if (scheme.target != Target::kATT) throw Error(ErrorCode::kSchemeMismatch, "scheme does not target the ATT");
  check_lambda(scheme.lambda);
  const Index n1 = data.n1();
  const Index n0 = data.n0();
  if (base.k.rows() != data.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "information matrix does not match data");
  }

  Matrix q = base.k.bottomRightCorner(n0, n0);
  q.diagonal().array() += scheme.lambda - base.lambda;
  // The cross block of K_G is -K10; the linear term is -(1/n1) K10' 1.
  const Vector c = base.k.topRightCorner(n1, n0).colwise().sum().transpose() / static_cast<double>(n1);

  const Matrix x0 = data.control_x();
  const Matrix x1 = data.treated_x();
  std::vector<Index> moment_rows;
  std::vector<Index> dropped;
  std::vector<std::string> warnings;
  if (scheme.moments == MomentConstraints::kFirstMoment) {
    for (Index d = 0; d < data.dim(); ++d) {
      const double target = x1.col(d).mean();
      const bool constant = is_constant(x0.col(d));
      if (constant && std::abs(x0(0, d) - target) <= 1e-12 * std::max(1.0, std::abs(target))) {
        dropped.push_back(d);
        warnings.push_back("covariate " + std::to_string(d) + " is constant; moment row dropped");
      } else {
        moment_rows.push_back(d);
      }
    }
  }

  const Index m = 1 + static_cast<Index>(moment_rows.size());
  Matrix aeq = Matrix::Zero(m, n0);
  Vector beq = Vector::Zero(m);
  aeq.row(0).setOnes();
  beq(0) = 1.0;
  for (std::size_t r = 0; r < moment_rows.size(); ++r) {
    const Index d = moment_rows[r];
    aeq.row(1 + static_cast<Index>(r)) = x0.col(d).transpose();
    beq(1 + static_cast<Index>(r)) = x1.col(d).mean();
  }
  return BalanceProblem{QuadraticProgram(std::move(q), c, std::move(aeq), std::move(beq),
                                         std::vector<bool>(static_cast<std::size_t>(n0), true)),
                        scheme, std::move(dropped), std::move(warnings)};
}

BalanceResult solve_balance(const Dataset& data, const BalanceScheme& scheme, const InformationMatrix& base,
                            const QPOptions& options) {
  precheck_hull(data, scheme);
  BalanceProblem problem = scheme.target == Target::kATE ? build_ate_problem(data, scheme, base)
                                                         : build_att_problem(data, scheme, base);
  BalanceResult result;
  result.solution = solve_qp(problem.qp, std::nullopt, options);
  result.warnings = std::move(problem.warnings);
  if (result.solution.status == QPStatus::kInfeasible) {
    throw Error(ErrorCode::kInfeasibleBalance, "balance constraints cannot be satisfied");
  }
  if (result.solution.status != QPStatus::kOptimal) {
    throw Error(ErrorCode::kNumericalBreakdown, "balancing QP did not converge");
  }

  const Vector& x = result.solution.x;
  BalanceWeights& w = result.weights;
  w.lambda = scheme.lambda;
  const Index n1 = data.n1();
  if (scheme.target == Target::kATE) {
    w.p = x.head(n1);
    w.q = x.tail(data.n0());
    w.scheme = scheme.moments == MomentConstraints::kFirstMoment ? WeightScheme::kKDM1 : WeightScheme::kKDBC;
  } else {
    w.p = Vector::Constant(n1, 1.0 / static_cast<double>(n1));
    w.q = x;
    w.scheme = WeightScheme::kAttKDB;
  }
  return result;
}

BalanceWeights solve_weights(const Dataset& data, const BalanceScheme& scheme, Bandwidth bw,
                             const QPOptions& options) {
  return solve_balance(data, scheme, information_matrix(data, bw, 0.0), options).weights;
}

double estimate_ate(const Dataset& data, const BalanceWeights& w) {
  if (!w.is_ate_type()) throw Error(ErrorCode::kSchemeMismatch, "weights are not ATE weights");
  if (w.p.size() != data.n1() || w.q.size() != data.n0()) {
    throw Error(ErrorCode::kDimensionMismatch, "weights are not dimensioned to the dataset");
  }
  return w.p.dot(data.treated_y()) - w.q.dot(data.control_y());
}

double estimate_att(const Dataset& data, const BalanceWeights& w) {
  if (!w.is_att_type()) throw Error(ErrorCode::kSchemeMismatch, "weights are not ATT weights");
  if (w.p.size() != data.n1() || w.q.size() != data.n0()) {
    throw Error(ErrorCode::kDimensionMismatch, "weights are not dimensioned to the dataset");
  }
  return w.p.dot(data.treated_y()) - w.q.dot(data.control_y());
}

}  // namespace kdb
