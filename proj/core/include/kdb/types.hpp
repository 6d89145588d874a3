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

#ifndef KDB_TYPES_HPP
#define KDB_TYPES_HPP

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kdb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Target { kATE, kATT };

/// Which estimator produced a set of weights. Determines which effect
/// (ATE or ATT) the weights may be used for.
enum class WeightScheme {
  kKDBC,        // kernel-distance weights, simplex constraints only (ATE)
  kKDM1,        // kernel-distance weights, plus first-moment balance (ATE)
  kAttKDB,      // kernel-distance ATT weights, p fixed at 1/n1
  kIpwAte,
  kIpwAtt,
  kUnadjusted,  // valid for both ATE and ATT
};

std::string_view to_string(WeightScheme scheme) noexcept;

/// Treated-side weights p (length n1) and control-side weights q (length
/// n0), in the dataset's treated/control order.
struct BalanceWeights {
  Vector p;
  Vector q;
  WeightScheme scheme = WeightScheme::kUnadjusted;
  double lambda = 0.0;

  bool is_ate_type() const noexcept;
  bool is_att_type() const noexcept;

  /// Throws kInvalidArgument when the nonnegativity or normalisation
  /// constraints of the scheme do not hold.
  void check_invariants() const;
};

struct EstimateReport {
  std::string method;
  std::vector<double> estimates;
  double truth = 0.0;
  double mean = 0.0;
  double bias = 0.0;
  double pct_bias = 0.0;
  double sd = 0.0;    // std(estimates) / sqrt(N_sim)
  double rmse = 0.0;
};

struct BalanceReport {
  double rw = 0.0;
  double kd = 0.0;
  double max_asmd = 0.0;
  double mean_asmd = 0.0;
  double med_asmd = 0.0;
  std::vector<double> per_covariate_asmd;
  double mean_ks = 0.0;
  double mean_t = 0.0;
};

}  // namespace kdb

#endif  // KDB_TYPES_HPP
