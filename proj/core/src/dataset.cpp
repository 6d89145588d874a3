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

#include "kdb/dataset.hpp"

#include "kdb/error.hpp"

namespace kdb {
namespace {

void require_finite(const Eigen::Ref<const Matrix>& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::kNonFiniteValue, std::string(what) + " has non-finite entries");
}

Matrix select_rows(const Matrix& x, std::span<const Index> idx) {
  Matrix out(static_cast<Index>(idx.size()), x.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Index>(r)) = x.row(idx[r]);
  return out;
}

Vector select(const Vector& v, std::span<const Index> idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) out(static_cast<Index>(r)) = v(idx[r]);
  return out;
}

}  // namespace

Dataset Dataset::validate(Matrix x, Vector t, Vector y, std::optional<Vector> y0, std::optional<Vector> y1) {
  const Index n = x.rows();
  if (t.size() != n || y.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "X, T and Y must have the same number of rows");
  }
  if (x.cols() == 0) throw Error(ErrorCode::kDimensionMismatch, "at least one covariate is required");
  if (y0.has_value() != y1.has_value()) {
    throw Error(ErrorCode::kDimensionMismatch, "potential outcomes must be given as a pair");
  }
  if (y0 && (y0->size() != n || y1->size() != n)) {
    throw Error(ErrorCode::kDimensionMismatch, "potential outcomes must have N entries");
  }
  require_finite(x, "X");
  require_finite(y, "Y");

  Dataset d;
  for (Index i = 0; i < n; ++i) {
    if (t(i) == 1.0) {
      d.treated_.push_back(i);
    } else if (t(i) == 0.0) {
      d.control_.push_back(i);
    } else {
      throw Error(ErrorCode::kNonBinaryTreatment,
                  "treatment entry " + std::to_string(i) + " is not exactly 0 or 1");
    }
  }
  if (d.treated_.empty() || d.control_.empty()) {
    throw Error(ErrorCode::kEmptyGroup, "both treated and control groups must be nonempty");
  }
  if (y0) {
    require_finite(*y0, "Y0");
    require_finite(*y1, "Y1");
    for (Index i = 0; i < n; ++i) {
      const double expected = t(i) == 1.0 ? (*y1)(i) : (*y0)(i);
      if (y(i) != expected) {
        throw Error(ErrorCode::kInconsistentOutcomes,
                    "Y differs from the potential outcome selected by T at row " + std::to_string(i));
      }
    }
  }
  d.x_ = std::move(x);
  d.t_ = std::move(t);
  d.y_ = std::move(y);
  d.y0_ = std::move(y0);
  d.y1_ = std::move(y1);
  return d;
}

Matrix Dataset::treated_x() const { return select_rows(x_, treated_); }
Matrix Dataset::control_x() const { return select_rows(x_, control_); }
Vector Dataset::treated_y() const { return select(y_, treated_); }
Vector Dataset::control_y() const { return select(y_, control_); }

Dataset Dataset::rows(std::span<const Index> idx) const {
  for (Index i : idx) {
    if (i < 0 || i >= size()) throw Error(ErrorCode::kDimensionMismatch, "row index out of range");
  }
  std::optional<Vector> y0, y1;
  if (y0_) {
    y0 = select(*y0_, idx);
    y1 = select(*y1_, idx);
  }
  return validate(select_rows(x_, idx), select(t_, idx), select(y_, idx), std::move(y0), std::move(y1));
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.x_.rows() != b.x_.rows() || a.x_.cols() != b.x_.cols()) return false;
  if (a.x_ != b.x_ || a.t_ != b.t_ || a.y_ != b.y_) return false;
  if (a.y0_.has_value() != b.y0_.has_value()) return false;
  if (a.y0_ && (*a.y0_ != *b.y0_ || *a.y1_ != *b.y1_)) return false;
  return a.treated_ == b.treated_ && a.control_ == b.control_;
}

}  // namespace kdb
