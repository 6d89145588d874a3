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

#ifndef KDB_DATASET_HPP
#define KDB_DATASET_HPP

#include <optional>
#include <span>
#include <vector>

#include "kdb/types.hpp"

namespace kdb {

/// Observational dataset: covariates X (N x D), binary treatment T and
/// observed outcome Y. Simulated data may also carry both potential
/// outcomes. Instances are immutable and always valid; construct through
/// Dataset::validate.
class Dataset {
 public:
  /// Checks dimensions, that T is exactly 0/1 with both groups nonempty,
  /// that every value is finite and, when potential outcomes are given,
  /// that Y = T*Y1 + (1-T)*Y0 holds entry by entry.
  static Dataset validate(Matrix x, Vector t, Vector y,
                          std::optional<Vector> y0 = std::nullopt,
                          std::optional<Vector> y1 = std::nullopt);

  const Matrix& x() const noexcept { return x_; }
  const Vector& t() const noexcept { return t_; }
  const Vector& y() const noexcept { return y_; }
  const std::optional<Vector>& y0() const noexcept { return y0_; }
  const std::optional<Vector>& y1() const noexcept { return y1_; }
  bool has_potential_outcomes() const noexcept { return y0_.has_value(); }

  Index size() const noexcept { return x_.rows(); }
  Index dim() const noexcept { return x_.cols(); }
  Index n1() const noexcept { return static_cast<Index>(treated_.size()); }
  Index n0() const noexcept { return static_cast<Index>(control_.size()); }
  bool is_treated(Index i) const { return t_[i] == 1.0; }

  /// Row indices of treated (control) units in ascending order.
  std::span<const Index> treated() const noexcept { return treated_; }
  std::span<const Index> control() const noexcept { return control_; }

  Matrix treated_x() const;
  Matrix control_x() const;
  Vector treated_y() const;
  Vector control_y() const;

  /// Subset of rows, in the given order (rows may repeat). Throws
  /// kEmptyGroup if the subset loses a group.
  Dataset rows(std::span<const Index> idx) const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  Dataset() = default;

  Matrix x_;
  Vector t_;
  Vector y_;
  std::optional<Vector> y0_;
  std::optional<Vector> y1_;
  std::vector<Index> treated_;
  std::vector<Index> control_;
};

}  // namespace kdb

#endif  // KDB_DATASET_HPP
