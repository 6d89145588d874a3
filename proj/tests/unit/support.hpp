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

#ifndef KDB_TESTS_SUPPORT_HPP
#define KDB_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "kdb/dataset.hpp"
#include "kdb/types.hpp"

namespace kdb::testing {

/// Random dataset with n units, d covariates and both groups nonempty.
/// Treated units get a mean shift so the groups differ.
inline Dataset random_dataset(std::mt19937_64& gen, Index n, Index d, double shift = 0.5) {
  std::normal_distribution<double> normal;
  Matrix x(n, d);
  Vector t(n), y(n);
  for (Index i = 0; i < n; ++i) {
    t(i) = i < n / 2 ? 1.0 : 0.0;
    for (Index j = 0; j < d; ++j) x(i, j) = normal(gen) + shift * t(i);
    y(i) = x.row(i).sum() + 2.0 * t(i) + normal(gen);
  }
  std::shuffle(t.data(), t.data() + n, gen);
  if (t.sum() < 1) t(0) = 1.0;
  if (t.sum() > static_cast<double>(n) - 1) t(0) = 0.0;
  return Dataset::validate(std::move(x), std::move(t), std::move(y));
}

inline Dataset make_dataset(std::initializer_list<double> x1, std::initializer_list<double> x0) {
  const Index n1 = static_cast<Index>(x1.size());
  const Index n = n1 + static_cast<Index>(x0.size());
  Matrix x(n, 1);
  Vector t = Vector::Zero(n);
  Index i = 0;
  for (double v : x1) {
    x(i, 0) = v;
    t(i++) = 1.0;
  }
  for (double v : x0) x(i++, 0) = v;
  return Dataset::validate(std::move(x), std::move(t), Vector::Zero(n));
}

/// Plain nested-loop MMD^2 with uniform weights.
inline double brute_force_mmd2(const Matrix& a, const Matrix& b, double sigma2) {
  const auto k = [&](const auto& u, const auto& v) {
    double s = 0.0;
    for (Index j = 0; j < u.size(); ++j) s += (u(j) - v(j)) * (u(j) - v(j));
    return std::exp(-s / sigma2);
  };
  double aa = 0.0, bb = 0.0, ab = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.rows(); ++j) aa += k(a.row(i), a.row(j));
  for (Index i = 0; i < b.rows(); ++i)
    for (Index j = 0; j < b.rows(); ++j) bb += k(b.row(i), b.row(j));
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.rows(); ++j) ab += k(a.row(i), b.row(j));
  const double na = static_cast<double>(a.rows());
  const double nb = static_cast<double>(b.rows());
  return aa / (na * na) + bb / (nb * nb) - 2.0 * ab / (na * nb);
}

inline BalanceWeights uniform_weights(const Dataset& data, WeightScheme scheme = WeightScheme::kUnadjusted) {
  BalanceWeights w;
  w.p = Vector::Constant(data.n1(), 1.0 / static_cast<double>(data.n1()));
  w.q = Vector::Constant(data.n0(), 1.0 / static_cast<double>(data.n0()));
  w.scheme = scheme;
  return w;
}

}  // namespace kdb::testing

#endif  // KDB_TESTS_SUPPORT_HPP
