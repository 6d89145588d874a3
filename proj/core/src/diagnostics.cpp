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

#include "kdb/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "kdb/error.hpp"

namespace kdb {
namespace {

double sample_variance(const Vector& v) {
  if (v.size() < 2) return 0.0;
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(v.size() - 1);
}

double weighted_mean(const WeightedSample& s) { return s.masses.dot(s.values); }

double weighted_variance(const WeightedSample& s) {
  const double mean = weighted_mean(s);
  const double denom = 1.0 - s.masses.squaredNorm();
  if (denom <= 0.0) return 0.0;
  return (s.masses.array() * (s.values.array() - mean).square()).sum() / denom;
}

Vector column_of(const Dataset& data, Index d) {
  if (d < 0 || d >= data.dim()) throw Error(ErrorCode::kInvalidArgument, "covariate index out of range");
  return data.x().col(d);
}

void check_weights(const Dataset& data, const BalanceWeights& w) {
  if (w.p.size() != data.n1() || w.q.size() != data.n0()) {
    throw Error(ErrorCode::kDimensionMismatch, "weights are not dimensioned to the dataset");
  }
}

Vector pick(const Vector& column, std::span<const Index> rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) out(static_cast<Index>(k)) = column(rows[k]);
  return out;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

WeightedSample WeightedSample::make(Vector values, Vector masses) {
  if (values.size() == 0) throw Error(ErrorCode::kEmptySample, "weighted sample has no values");
  if (values.size() != masses.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "values and masses differ in length");
  }
  if (!values.allFinite() || !masses.allFinite()) throw Error(ErrorCode::kNonFiniteValue, "non-finite sample");
  // Solver output may carry -1e-16 style rounding; anything worse is an error.
  if (masses.minCoeff() < -1e-10) throw Error(ErrorCode::kInvalidArgument, "negative mass");
  masses = masses.cwiseMax(0.0);
  const double total = masses.sum();
  if (!(total > 0.0)) throw Error(ErrorCode::kEmptySample, "weighted sample has zero total mass");
  return WeightedSample{std::move(values), masses / total};
}

WeightedSample WeightedSample::uniform(Vector values) {
  const Index n = values.size();
  return make(std::move(values), Vector::Ones(n));
}

WeightedEcdf::WeightedEcdf(const WeightedSample& s) {
  std::vector<Index> order(static_cast<std::size_t>(s.values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return s.values(a) < s.values(b); });
  double acc = 0.0;
  for (Index i : order) {
    acc += s.masses(i);
    if (!support_.empty() && support_.back() == s.values(i)) {
      cumulative_.back() = acc;
    } else {
      support_.push_back(s.values(i));
      cumulative_.push_back(acc);
    }
  }
  if (!cumulative_.empty()) cumulative_.back() = 1.0;
}

double WeightedEcdf::operator()(double x) const {
  const auto it = std::upper_bound(support_.begin(), support_.end(), x);
  if (it == support_.begin()) return 0.0;
  return cumulative_[static_cast<std::size_t>(it - support_.begin()) - 1];
}

double WeightedEcdf::quantile(double level) const {
  const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), level - 1e-15);
  if (it == cumulative_.end()) return support_.back();
  return support_[static_cast<std::size_t>(it - cumulative_.begin())];
}

WeightedEcdf weighted_ecdf(const WeightedSample& s) { return WeightedEcdf(s); }

WeightedSample treated_sample(const Dataset& data, const BalanceWeights& w, const Vector& column) {
  check_weights(data, w);
  if (column.size() != data.size()) throw Error(ErrorCode::kDimensionMismatch, "column length differs from N");
  return WeightedSample::make(pick(column, data.treated()), w.p);
}

WeightedSample control_sample(const Dataset& data, const BalanceWeights& w, const Vector& column) {
  check_weights(data, w);
  if (column.size() != data.size()) throw Error(ErrorCode::kDimensionMismatch, "column length differs from N");
  return WeightedSample::make(pick(column, data.control()), w.q);
}

WeightedSample treated_sample(const Dataset& data, const BalanceWeights& w, Index d) {
  return treated_sample(data, w, column_of(data, d));
}

WeightedSample control_sample(const Dataset& data, const BalanceWeights& w, Index d) {
  return control_sample(data, w, column_of(data, d));
}

double asmd_ate(const Dataset& data, const BalanceWeights& w, const Vector& column) {
  const WeightedSample t = treated_sample(data, w, column);
  const WeightedSample c = control_sample(data, w, column);
  const double pooled = 0.5 * (sample_variance(t.values) + sample_variance(c.values));
  if (!(pooled > 0.0)) throw Error(ErrorCode::kZeroVariance, "both groups have zero variance");
  return std::abs(weighted_mean(t) - weighted_mean(c)) / std::sqrt(pooled);
}

double asmd_ate(const Dataset& data, const BalanceWeights& w, Index d) {
  return asmd_ate(data, w, column_of(data, d));
}

double asmd_att(const Dataset& data, const BalanceWeights& w, const Vector& column) {
  const WeightedSample t = treated_sample(data, w, column);
  const WeightedSample c = control_sample(data, w, column);
  const double sd = std::sqrt(sample_variance(t.values));
  if (!(sd > 0.0)) throw Error(ErrorCode::kZeroVariance, "treated group has zero variance");
  return std::abs(weighted_mean(t) / sd - weighted_mean(c) / sd);
}

double asmd_att(const Dataset& data, const BalanceWeights& w, Index d) {
  return asmd_att(data, w, column_of(data, d));
}

double ks_stat(const WeightedSample& treated, const WeightedSample& control) {
  const WeightedEcdf f1(treated);
  const WeightedEcdf f0(control);
  double best = 0.0;
  for (double x : f1.support()) best = std::max(best, std::abs(f1(x) - f0(x)));
  for (double x : f0.support()) best = std::max(best, std::abs(f1(x) - f0(x)));
  return best;
}

double mean_ks(const Dataset& data, const BalanceWeights& w) {
  double acc = 0.0;
  for (Index d = 0; d < data.dim(); ++d) acc += ks_stat(treated_sample(data, w, d), control_sample(data, w, d));
  return acc / static_cast<double>(data.dim());
}

double welch_t(const WeightedSample& treated, const WeightedSample& control) {
  const double n1 = static_cast<double>(treated.values.size());
  const double n0 = static_cast<double>(control.values.size());
  if (n1 < 2 || n0 < 2) throw Error(ErrorCode::kInvalidArgument, "Welch statistic needs two units per group");
  const double se = std::sqrt(weighted_variance(treated) / n1 + weighted_variance(control) / n0);
  if (!(se > 0.0)) throw Error(ErrorCode::kZeroVariance, "weighted variances are zero");
  return (weighted_mean(treated) - weighted_mean(control)) / se;
}

double mean_t(const Dataset& data, const BalanceWeights& w) {
  double acc = 0.0;
  for (Index d = 0; d < data.dim(); ++d) acc += welch_t(treated_sample(data, w, d), control_sample(data, w, d));
  return acc / static_cast<double>(data.dim());
}

EstimateReport estimator_metrics(std::string method, std::span<const double> estimates, double truth) {
  if (estimates.size() < 2) throw Error(ErrorCode::kTooFewEstimates, "need at least two estimates");
  EstimateReport r;
  r.method = std::move(method);
  r.estimates.assign(estimates.begin(), estimates.end());
  r.truth = truth;
  const double n = static_cast<double>(estimates.size());
  double sum = 0.0;
  double sq_err = 0.0;
  for (double e : estimates) {
    sum += e;
    sq_err += (e - truth) * (e - truth);
  }
  r.mean = sum / n;
  double ss = 0.0;
  for (double e : estimates) ss += (e - r.mean) * (e - r.mean);
  const double stdev = std::sqrt(ss / (n - 1.0));
  r.bias = r.mean - truth;
  r.sd = stdev / std::sqrt(n);
  r.pct_bias = stdev > 0.0 ? 100.0 * r.bias / stdev : (r.bias == 0.0 ? 0.0 : std::copysign(INFINITY, r.bias));
  r.rmse = std::sqrt(sq_err / n);
  return r;
}

BalanceReport balance_report(const Dataset& data, const BalanceWeights& w, Bandwidth bw, Target target) {
  BalanceReport r;
  r.rw = rw_stat(data, w, bw);
  r.kd = std::sqrt(std::max(r.rw, 0.0));
  r.per_covariate_asmd.reserve(static_cast<std::size_t>(data.dim()));
  for (Index d = 0; d < data.dim(); ++d) {
    r.per_covariate_asmd.push_back(target == Target::kATE ? asmd_ate(data, w, d) : asmd_att(data, w, d));
  }
  const auto& a = r.per_covariate_asmd;
  r.max_asmd = *std::max_element(a.begin(), a.end());
  r.mean_asmd = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
  r.med_asmd = median_of(a);
  r.mean_ks = mean_ks(data, w);
  r.mean_t = mean_t(data, w);
  return r;
}

double silverman_bandwidth(const WeightedSample& s) {
  const double sd = std::sqrt(std::max(weighted_variance(s), 0.0));
  const WeightedEcdf f(s);
  const double iqr = f.quantile(0.75) - f.quantile(0.25);
  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  const double n_eff = 1.0 / s.masses.squaredNorm();
  const double h = 0.9 * spread * std::pow(n_eff, -0.2);
  // A point mass has no spread; fall back to a unit bandwidth.
  return h > 0.0 ? h : 1.0;
}

Vector weighted_density_series(const WeightedSample& s, const Vector& grid, std::optional<double> bandwidth) {
  if (s.values.size() == 0) throw Error(ErrorCode::kEmptySample, "density of an empty sample");
  const double h = bandwidth.value_or(silverman_bandwidth(s));
  if (!(h > 0.0)) throw Error(ErrorCode::kInvalidArgument, "density bandwidth must be positive");
  const double norm = 1.0 / (h * std::sqrt(2.0 * std::numbers::pi));
  Vector out(grid.size());
  for (Index g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (Index i = 0; i < s.values.size(); ++i) {
      const double z = (grid(g) - s.values(i)) / h;
      acc += s.masses(i) * std::exp(-0.5 * z * z);
    }
    out(g) = norm * acc;
  }
  return out;
}

void write_density_series(std::ostream& out, const Vector& grid, const Vector& density, char delim) {
  if (grid.size() != density.size()) throw Error(ErrorCode::kDimensionMismatch, "grid and density differ");
  out << "x" << delim << "density\n";
  out.precision(17);
  for (Index g = 0; g < grid.size(); ++g) out << grid(g) << delim << density(g) << '\n';
}

void write_ecdf_series(std::ostream& out, const WeightedEcdf& ecdf, char delim) {
  out << "x" << delim << "F\n";
  out.precision(17);
  for (std::size_t k = 0; k < ecdf.support().size(); ++k) {
    out << ecdf.support()[k] << delim << ecdf.cumulative()[k] << '\n';
  }
}

}  // namespace kdb
