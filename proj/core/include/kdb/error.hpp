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

#ifndef KDB_ERROR_HPP
#define KDB_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace kdb {

enum class ErrorCode {
  kDimensionMismatch,
  kNonBinaryTreatment,
  kEmptyGroup,
  kNonFiniteValue,
  kInconsistentOutcomes,
  kAllPointsIdentical,
  kDegenerateWitness,
  kRankDeficient,
  kNumericalBreakdown,
  kSingularQ,
  kSchemeMismatch,
  kInfeasibleBalance,
  kZeroVariance,
  kTooFewEstimates,
  kMissingPotentialOutcomes,
  kDegenerateAssignment,
  kEmptySample,
  kParseError,
  kSchemaError,
  kInvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code is
/// stable and is what callers (and the CLI exit-code mapping) dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// CSV failures carry the 1-based data row and the column name.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::string column, const std::string& what)
      : Error(ErrorCode::kParseError,
              "row " + std::to_string(row) + ", column " + column + ": " + what),
        row_(row),
        column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

}  // namespace kdb

#endif  // KDB_ERROR_HPP
