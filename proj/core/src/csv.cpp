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

#include "kdb/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "kdb/error.hpp"

namespace kdb {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(const std::string& token, double& out) {
  const std::string t = trim(token);
  if (t.empty()) return false;
  const char* begin = t.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size();
}

bool next_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!trim(line).empty()) return true;
  }
  return false;
}

std::vector<std::string> default_names(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t k = 1; k <= n; ++k) names.push_back("V" + std::to_string(k));
  return names;
}

std::size_t column_index(const std::vector<std::string>& names, const std::string& wanted) {
  const auto it = std::find(names.begin(), names.end(), wanted);
  if (it == names.end()) throw Error(ErrorCode::kSchemaError, "column '" + wanted + "' not found");
  if (std::find(it + 1, names.end(), wanted) != names.end()) {
    throw Error(ErrorCode::kSchemaError, "column '" + wanted + "' appears more than once");
  }
  return static_cast<std::size_t>(it - names.begin());
}

WeightScheme parse_scheme(const std::string& s) {
  for (WeightScheme w : {WeightScheme::kKDBC, WeightScheme::kKDM1, WeightScheme::kAttKDB, WeightScheme::kIpwAte,
                         WeightScheme::kIpwAtt, WeightScheme::kUnadjusted}) {
    if (to_string(w) == s) return w;
  }
  throw Error(ErrorCode::kSchemaError, "unknown weight scheme '" + s + "'");
}

}  // namespace

void CsvSchema::validate() const {
  if (covariate_columns.empty()) throw Error(ErrorCode::kSchemaError, "no covariate columns");
  std::set<std::string> seen{treatment_column};
  if (!seen.insert(outcome_column).second) throw Error(ErrorCode::kSchemaError, "column names must be distinct");
  for (const auto& c : covariate_columns) {
    if (!seen.insert(c).second) throw Error(ErrorCode::kSchemaError, "column '" + c + "' listed twice");
  }
}

std::vector<std::string> split_record(const std::string& line, char delimiter) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == delimiter) {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

Dataset read_csv(std::istream& in, const CsvSchema& schema) {
  schema.validate();
  std::string line;
  std::vector<std::string> names;
  bool pending = false;
  if (schema.header) {
    if (!next_line(in, line)) throw ParseError(0, "-", "missing header");
    for (auto& n : split_record(line, schema.delimiter)) names.push_back(trim(n));
  } else {
    if (!next_line(in, line)) throw Error(ErrorCode::kEmptySample, "no data rows");
    names = default_names(split_record(line, schema.delimiter).size());
    pending = true;
  }
  const std::size_t t_col = column_index(names, schema.treatment_column);
  const std::size_t y_col = column_index(names, schema.outcome_column);
  std::vector<std::size_t> x_cols;
  for (const auto& c : schema.covariate_columns) x_cols.push_back(column_index(names, c));

  std::vector<double> t, y, x;
  std::size_t row = 0;
  while (pending || next_line(in, line)) {
    pending = false;
    ++row;
    const auto fields = split_record(line, schema.delimiter);
    const auto cell = [&](std::size_t col) -> std::string {
      if (col >= fields.size() || trim(fields[col]).empty()) throw ParseError(row, names[col], "missing value");
      return trim(fields[col]);
    };
    const auto number = [&](std::size_t col) {
      double v = 0.0;
      const std::string token = cell(col);
      if (!parse_double(token, v)) throw ParseError(row, names[col], "not a number: '" + token + "'");
      return v;
    };
    if (fields.size() > names.size()) throw ParseError(row, "-", "more fields than header columns");
    const std::string tt = cell(t_col);
    if (tt != "0" && tt != "1") throw ParseError(row, names[t_col], "treatment must be 0 or 1, got '" + tt + "'");
    t.push_back(tt == "1" ? 1.0 : 0.0);
    y.push_back(number(y_col));
    for (std::size_t c : x_cols) x.push_back(number(c));
  }
  if (row == 0) throw Error(ErrorCode::kEmptySample, "no data rows");

  const Index n = static_cast<Index>(row);
  const Index d = static_cast<Index>(x_cols.size());
  Matrix xm(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) xm(i, j) = x[static_cast<std::size_t>(i * d + j)];
  }
  return Dataset::validate(std::move(xm), Eigen::Map<Vector>(t.data(), n), Eigen::Map<Vector>(y.data(), n));
}

Dataset read_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open " + path.string());
  return read_csv(in, schema);
}

std::vector<std::string> read_header(const std::filesystem::path& path, char delimiter, bool header) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kParseError, "cannot open " + path.string());
  std::string line;
  if (!next_line(in, line)) throw ParseError(0, "-", "empty file");
  auto fields = split_record(line, delimiter);
  if (!header) return default_names(fields.size());
  for (auto& f : fields) f = trim(f);
  return fields;
}

void write_weights(std::ostream& out, const Dataset& data, const BalanceWeights& w, char delim) {
  if (w.p.size() != data.n1() || w.q.size() != data.n0()) {
    throw Error(ErrorCode::kDimensionMismatch, "weights are not dimensioned to the dataset");
  }
  std::vector<double> per_unit(static_cast<std::size_t>(data.size()));
  Index k = 0;
  for (Index i : data.treated()) per_unit[static_cast<std::size_t>(i)] = w.p(k++);
  k = 0;
  for (Index j : data.control()) per_unit[static_cast<std::size_t>(j)] = w.q(k++);
  out << "unit" << delim << "group" << delim << "weight" << delim << "scheme" << delim << "lambda\n";
  char buf[64];
  for (Index i = 0; i < data.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", per_unit[static_cast<std::size_t>(i)]);
    out << i << delim << (data.is_treated(i) ? "treated" : "control") << delim << buf << delim
        << to_string(w.scheme) << delim;
    std::snprintf(buf, sizeof buf, "%.17g", w.lambda);
    out << buf << '\n';
  }
}

BalanceWeights read_weights(std::istream& in, const Dataset& data, char delim) {
  std::string line;
  if (!next_line(in, line)) throw ParseError(0, "-", "missing header");
  const auto header = split_record(line, delim);
  const std::vector<std::string> expected{"unit", "group", "weight", "scheme", "lambda"};
  std::vector<std::string> trimmed;
  for (const auto& h : header) trimmed.push_back(trim(h));
  if (trimmed != expected) throw Error(ErrorCode::kSchemaError, "unexpected weights header");

  BalanceWeights w;
  w.p = Vector::Zero(data.n1());
  w.q = Vector::Zero(data.n0());
  std::vector<Index> position(static_cast<std::size_t>(data.size()));
  for (Index k = 0; k < data.n1(); ++k) position[static_cast<std::size_t>(data.treated()[k])] = k;
  for (Index k = 0; k < data.n0(); ++k) position[static_cast<std::size_t>(data.control()[k])] = k;
  std::vector<bool> seen(static_cast<std::size_t>(data.size()), false);
  std::size_t row = 0;
  bool first = true;
  while (next_line(in, line)) {
    ++row;
    const auto f = split_record(line, delim);
    if (f.size() != expected.size()) throw ParseError(row, "-", "expected 5 fields");
    double unit = 0.0;
    if (!parse_double(f[0], unit) || unit < 0 || unit >= static_cast<double>(data.size()) ||
        unit != static_cast<double>(static_cast<Index>(unit))) {
      throw ParseError(row, "unit", "invalid unit index");
    }
    const Index i = static_cast<Index>(unit);
    if (seen[static_cast<std::size_t>(i)]) throw ParseError(row, "unit", "unit listed twice");
    seen[static_cast<std::size_t>(i)] = true;
    const std::string group = trim(f[1]);
    if (group != (data.is_treated(i) ? "treated" : "control")) throw ParseError(row, "group", "group disagrees with data");
    double value = 0.0;
    if (!parse_double(f[2], value)) throw ParseError(row, "weight", "not a number");
    const WeightScheme scheme = parse_scheme(trim(f[3]));
    double lambda = 0.0;
    if (!parse_double(f[4], lambda)) throw ParseError(row, "lambda", "not a number");
    if (first) {
      w.scheme = scheme;
      w.lambda = lambda;
      first = false;
    } else if (scheme != w.scheme || lambda != w.lambda) {
      throw ParseError(row, "scheme", "mixed schemes in one file");
    }
    (data.is_treated(i) ? w.p : w.q)(position[static_cast<std::size_t>(i)]) = value;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw Error(ErrorCode::kDimensionMismatch, "weights file does not cover every unit");
  }
  return w;
}

}  // namespace kdb
