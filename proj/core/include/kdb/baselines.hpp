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

#ifndef KDB_BASELINES_HPP
#define KDB_BASELINES_HPP

#include <vector>

#include "kdb/dataset.hpp"
#include "kdb/types.hpp"

namespace kdb {

/// Logistic regression of T on (1, X).
struct PropensityModel {
  Vector coefficients;  // intercept first
  Vector fitted;        // clipped to [clip, 1 - clip]
  bool converged = false;
  bool separation = false;  // coefficients diverged while the likelihood kept rising
  int iterations = 0;
  std::vector<double> log_likelihood;  // one entry per accepted iterate
};

struct LogisticOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-8;  // on the mean score, so it does not grow with n
  double clip = 1e-6;
  double divergence_bound = 30.0;
};

/// Newton-Raphson maximum likelihood with step halving.
PropensityModel fit_propensity_logistic(const Dataset& data, const LogisticOptions& options = {});

/// p_i proportional to 1/e(X_i) over treated, q_j proportional to
/// 1/(1 - e(X_j)) over control, each side normalised to one.
BalanceWeights ipw_ate_weights(const PropensityModel& model, const Dataset& data);

/// p_i = 1/n1, q_j = e(X_j) / (n1 (1 - e(X_j))). The control side is left
/// unnormalised unless normalize_control is set.
BalanceWeights ipw_att_weights(const PropensityModel& model, const Dataset& data,
                               bool normalize_control = false);

/// p_i = 1/n1, q_j = 1/n0.
BalanceWeights unadjusted_weights(const Dataset& data);

/// mean(Y1) - mean(Y0) over all units.
double oracle_ate(const Dataset& data);
/// mean(Y1 - Y0) over treated units.
double oracle_att(const Dataset& data);

}  // namespace kdb

#endif  // KDB_BASELINES_HPP
