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

#include "kdb/error.hpp"
#include "kdb/types.hpp"

#include <cmath>

namespace kdb {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonBinaryTreatment: return "NonBinaryTreatment";
    case ErrorCode::kEmptyGroup: return "EmptyGroup";
    case ErrorCode::kNonFiniteValue: return "NonFiniteValue";
    case ErrorCode::kInconsistentOutcomes: return "InconsistentOutcomes";
    case ErrorCode::kAllPointsIdentical: return "AllPointsIdentical";
    case ErrorCode::kDegenerateWitness: return "DegenerateWitness";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kNumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::kSingularQ: return "SingularQ";
    case ErrorCode::kSchemeMismatch: return "SchemeMismatch";
    case ErrorCode::kInfeasibleBalance: return "InfeasibleBalance";
    case ErrorCode::kZeroVariance: return "ZeroVariance";
    case ErrorCode::kTooFewEstimates: return "TooFewEstimates";
    case ErrorCode::kMissingPotentialOutcomes: return "MissingPotentialOutcomes";
    case ErrorCode::kDegenerateAssignment: return "DegenerateAssignment";
    case ErrorCode::kEmptySample: return "EmptySample";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::string_view to_string(WeightScheme scheme) noexcept {
  switch (scheme) {
    case WeightScheme::kKDBC: return "KDBC";
    case WeightScheme::kKDM1: return "KDM1";
    case WeightScheme::kAttKDB: return "ATT_KDB";
    case WeightScheme::kIpwAte: return "IPW_ATE";
    case WeightScheme::kIpwAtt: return "IPW_ATT";
    case WeightScheme::kUnadjusted: return "UNADJUSTED";
  }
  return "Unknown";
}

bool BalanceWeights::is_ate_type() const noexcept {
  return scheme == WeightScheme::kKDBC || scheme == WeightScheme::kKDM1 ||
         scheme == WeightScheme::kIpwAte || scheme == WeightScheme::kUnadjusted;
}

bool BalanceWeights::is_att_type() const noexcept {
  return scheme == WeightScheme::kAttKDB || scheme == WeightScheme::kIpwAtt ||
         scheme == WeightScheme::kUnadjusted;
}

void BalanceWeights::check_invariants() const {
  constexpr double kNonneg = -1e-10;
  constexpr double kSum = 1e-8;
  if (p.size() == 0 || q.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "weights must be nonempty on both sides");
  }
  if (!p.allFinite() || !q.allFinite()) throw Error(ErrorCode::kNonFiniteValue, "non-finite weight");
  if (p.minCoeff() < kNonneg || q.minCoeff() < kNonneg) {
    throw Error(ErrorCode::kInvalidArgument, "negative weight");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidArgument, "lambda must be finite and nonnegative");
  }
  const bool uniform_p_required = scheme == WeightScheme::kAttKDB || scheme == WeightScheme::kIpwAtt;
  if (uniform_p_required) {
    const double expected = 1.0 / static_cast<double>(p.size());
    if ((p.array() != expected).any()) {
      throw Error(ErrorCode::kInvalidArgument, "ATT weights require p = 1/n1");
    }
  } else if (std::abs(p.sum() - 1.0) > kSum) {
    throw Error(ErrorCode::kInvalidArgument, "treated weights do not sum to one");
  }
  // IPW ATT control weights are deliberately left unnormalised.
  if (scheme != WeightScheme::kIpwAtt && std::abs(q.sum() - 1.0) > kSum) {
    throw Error(ErrorCode::kInvalidArgument, "control weights do not sum to one");
  }
}

}  // namespace kdb
