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

#ifndef KDB_DIAGNOSTICS_HPP
#define KDB_DIAGNOSTICS_HPP

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kdb/dataset.hpp"
#include "kdb/kernel.hpp"
#include "kdb/types.hpp"

namespace kdb {

/// Values with probability masses. make() normalises the masses to one.
struct WeightedSample {
  Vector values;
  Vector masses;

  static WeightedSample make(Vector values, Vector masses);
  static WeightedSample uniform(Vector values);
};

/// Right-continuous weighted empirical CDF.
class WeightedEcdf {
 public:
  explicit WeightedEcdf(const WeightedSample& s);

  double operator()(double x) const;
  /// Distinct support points and the cumulative mass reached at each.
  const std::vector<double>& support() const noexcept { return support_; }
  const std::vector<double>& cumulative() const noexcept { return cumulative_; }
  /// Smallest support point whose cumulative mass reaches level.
  double quantile(double level) const;

 private:
  std::vector<double> support_;
  std::vector<double> cumulative_;
};

WeightedEcdf weighted_ecdf(const WeightedSample& s);

/// Treated (control) values of covariate d with the p (q) weights as masses.
WeightedSample treated_sample(const Dataset& data, const BalanceWeights& w, Index d);
WeightedSample control_sample(const Dataset& data, const BalanceWeights& w, Index d);
/// Column d of an arbitrary covariate matrix aligned with the dataset rows,
/// e.g. an unobserved simulation covariate.
WeightedSample treated_sample(const Dataset& data, const BalanceWeights& w, const Vector& column);
WeightedSample control_sample(const Dataset& data, const BalanceWeights& w, const Vector& column);

/// |weighted mean diff| / sqrt((S1^2 + S0^2) / 2), unweighted group variances.
double asmd_ate(const Dataset& data, const BalanceWeights& w, Index d);
double asmd_ate(const Dataset& data, const BalanceWeights& w, const Vector& column);
/// |weighted mean diff| / sd of the treated group (unweighted).
double asmd_att(const Dataset& data, const BalanceWeights& w, Index d);
double asmd_att(const Dataset& data, const BalanceWeights& w, const Vector& column);

/// sup_x |F1(x) - F0(x)| between the weighted treated and control ECDFs.
double ks_stat(const WeightedSample& treated, const WeightedSample& control);
double mean_ks(const Dataset& data, const BalanceWeights& w);

/// Welch statistic between weighted means; weighted variances use
/// sum w (x - xbar_w)^2 / (1 - sum w^2) with normalised w.
double welch_t(const WeightedSample& treated, const WeightedSample& control);
double mean_t(const Dataset& data, const BalanceWeights& w);

/// bias = mean - truth, sd = std / sqrt(N_sim), pct_bias = 100 bias / std,
/// rmse = sqrt(mean((est - truth)^2)).
EstimateReport estimator_metrics(std::string method, std::span<const double> estimates, double truth);

/// All balance statistics; the ASMD variant follows target.
BalanceReport balance_report(const Dataset& data, const BalanceWeights& w, Bandwidth bw, Target target);

/// Silverman's rule with the weighted sd, weighted IQR and effective size.
double silverman_bandwidth(const WeightedSample& s);

/// Weighted Gaussian KDE evaluated on grid.
Vector weighted_density_series(const WeightedSample& s, const Vector& grid,
                               std::optional<double> bandwidth = std::nullopt);

/// Two-column delimited series with a header line.
void write_density_series(std::ostream& out, const Vector& grid, const Vector& density, char delim = ',');
void write_ecdf_series(std::ostream& out, const WeightedEcdf& ecdf, char delim = ',');

}  // namespace kdb

#endif  // KDB_DIAGNOSTICS_HPP
