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

#ifndef KDB_BALANCING_HPP
#define KDB_BALANCING_HPP

#include <string>
#include <vector>

#include "kdb/dataset.hpp"
#include "kdb/kernel.hpp"
#include "kdb/qp.hpp"
#include "kdb/types.hpp"

namespace kdb {

enum class MomentConstraints {
  kNone,         // simplex constraints only (KDBC)
  kFirstMoment,  // plus exact balance of every covariate mean (KDM1)
};

struct BalanceScheme {
  Target target = Target::kATE;
  MomentConstraints moments = MomentConstraints::kNone;
  double lambda = 0.0;
};

/// A kernel-distance weighting problem ready for solve_qp, plus the
/// bookkeeping needed to map the solution back to weights.
struct BalanceProblem {
  QuadraticProgram qp;
  BalanceScheme scheme;
  /// Covariates left out of the moment rows because they are constant
  /// (their row would duplicate the simplex constraints).
  std::vector<Index> dropped_covariates;
  std::vector<std::string> warnings;
};

/// ATE problem over w = (p, q) in treated-first order:
///   min 1/2 w'(K_G + lambda I)w  s.t. sum p = 1, sum q = 1, w >= 0,
/// and for first-moment schemes sum_i p_i X1i,d = sum_j q_j X0j,d for each d.
BalanceProblem build_ate_problem(const Dataset& data, const BalanceScheme& scheme, Bandwidth bw);
/// Same, reusing an un-ridged information matrix of the dataset.
BalanceProblem build_ate_problem(const Dataset& data, const BalanceScheme& scheme,
                                 const InformationMatrix& base);

/// ATT problem over q only, with p frozen at 1/n1:
///   min 1/2 q'(K0 + lambda I)q - (1/n1) 1'K10 q  s.t. sum q = 1, q >= 0,
/// and for first-moment schemes sum_j q_j X0j,d = mean of X1,d.
BalanceProblem build_att_problem(const Dataset& data, const BalanceScheme& scheme, Bandwidth bw);
BalanceProblem build_att_problem(const Dataset& data, const BalanceScheme& scheme,
                                 const InformationMatrix& base);

struct BalanceResult {
  BalanceWeights weights;
  QPSolution solution;
  std::vector<std::string> warnings;
};

/// Builds and solves the scheme's problem. Throws kInfeasibleBalance when
/// the constraints cannot be met and kNumericalBreakdown when the solver
/// does not converge.
BalanceResult solve_balance(const Dataset& data, const BalanceScheme& scheme, const InformationMatrix& base,
                            const QPOptions& options = {});
BalanceWeights solve_weights(const Dataset& data, const BalanceScheme& scheme, Bandwidth bw,
                             const QPOptions& options = {});

/// sum p_i Y1i - sum q_j Y0j. Requires ATE-type weights.
double estimate_ate(const Dataset& data, const BalanceWeights& w);
/// sum p_i Y1i - sum q_j Y0j with p = 1/n1. Requires ATT-type weights.
double estimate_att(const Dataset& data, const BalanceWeights& w);

}  // namespace kdb

#endif  // KDB_BALANCING_HPP
