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

#ifndef KDB_CSV_HPP
#define KDB_CSV_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kdb/dataset.hpp"
#include "kdb/types.hpp"

namespace kdb {

/// Column layout of an input table. Without a header row the columns are
/// addressed as V1, V2, ... in file order.
struct CsvSchema {
  std::string treatment_column = "T";
  std::string outcome_column = "Y";
  std::vector<std::string> covariate_columns;
  char delimiter = ',';
  bool header = true;

  /// Throws kSchemaError on an empty covariate list or repeated names.
  void validate() const;
};

/// Splits one record; double quotes protect delimiters and "" escapes a quote.
std::vector<std::string> split_record(const std::string& line, char delimiter);

/// Rows are numbered from 1 for the first data row. Treatment cells must be
/// exactly "0" or "1".
Dataset read_csv(std::istream& in, const CsvSchema& schema);
Dataset read_csv(const std::filesystem::path& path, const CsvSchema& schema);

/// Header names of a delimited file (V1.. when header is false).
std::vector<std::string> read_header(const std::filesystem::path& path, char delimiter, bool header);

/// One line per unit: unit (row index), group, weight, scheme, lambda.
void write_weights(std::ostream& out, const Dataset& data, const BalanceWeights& w, char delim = ',');
/// Inverse of write_weights; checks units and groups against data.
BalanceWeights read_weights(std::istream& in, const Dataset& data, char delim = ',');

}  // namespace kdb

#endif  // KDB_CSV_HPP
