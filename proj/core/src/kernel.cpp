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

#include "kdb/kernel.hpp"

#include <algorithm>
#include <cmath>

#include "kdb/error.hpp"

namespace kdb {
namespace {

void check_weight_dims(const Dataset& data, const BalanceWeights& w) {
  if (w.p.size() != data.n1() || w.q.size() != data.n0()) {
    throw Error(ErrorCode::kDimensionMismatch, "weights are not dimensioned to the dataset");
  }
}

/// Signed weight per original row: +p for treated, -q for control.
Vector signed_weights(const Dataset& data, const BalanceWeights& w) {
  Vector s(data.size());
  const auto tr = data.treated();
  const auto co = data.control();
  for (std::size_t a = 0; a < tr.size(); ++a) s(tr[a]) = w.p(static_cast<Index>(a));
  for (std::size_t b = 0; b < co.size(); ++b) s(co[b]) = -w.q(static_cast<Index>(b));
  return s;
}

}  // namespace

Bandwidth::Bandwidth(double sigma2) : sigma2_(sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
    throw Error(ErrorCode::kInvalidArgument, "bandwidth sigma2 must be positive and finite");
  }
}

double squared_distance(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kDimensionMismatch, "kernel arguments differ in dimension");
  double acc = 0.0;
  for (Index d = 0; d < x.size(); ++d) {
    const double diff = x(d) - y(d);
    acc += diff * diff;
  }
  return acc;
}

double gaussian_kernel(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y, Bandwidth bw) {
  return std::exp(-squared_distance(x, y) / bw.sigma2());
}

Matrix pairwise_squared_distances(const Matrix& x) {
  const Index n = x.rows();
  Matrix d = Matrix::Zero(n, n);
  const Matrix xt = x.transpose();  // columns are points
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      const double v = squared_distance(xt.col(i), xt.col(j));
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

Bandwidth median_bandwidth(const Matrix& x, BandwidthRule rule) {
  const Index n = x.rows();
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "median bandwidth needs at least two rows");
  const Matrix xt = x.transpose();
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      const double v = squared_distance(xt.col(i), xt.col(j));
      if (v > 0.0) values.push_back(v);
    }
  }
  if (values.empty()) throw Error(ErrorCode::kAllPointsIdentical, "no positive pairwise distance");

  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double median = values[mid];
  if (values.size() % 2 == 0) {
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    median = 0.5 * (lower + median);
  }
  return Bandwidth(rule == BandwidthRule::kSquaredMedian ? median * median : median);
}

Matrix gram(const Matrix& a, const Matrix& b, Bandwidth bw) {
  if (a.cols() != b.cols()) throw Error(ErrorCode::kDimensionMismatch, "gram arguments differ in dimension");
  const Matrix at = a.transpose();
  const Matrix bt = b.transpose();
  Matrix g(a.rows(), b.rows());
  for (Index j = 0; j < b.rows(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      g(i, j) = std::exp(-squared_distance(at.col(i), bt.col(j)) / bw.sigma2());
    }
  }
  return g;
}

InformationMatrix information_matrix(const Dataset& data, Bandwidth bw, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidArgument, "ridge lambda must be finite and nonnegative");
  }
  InformationMatrix info;
  info.bandwidth = bw;
  info.lambda = lambda;
  info.n1 = data.n1();
  const Index n = data.size();
  info.row_at.reserve(static_cast<std::size_t>(n));
  for (Index i : data.treated()) info.row_at.push_back(i);
  for (Index i : data.control()) info.row_at.push_back(i);
  info.block_of.assign(static_cast<std::size_t>(n), 0);
  for (Index b = 0; b < n; ++b) info.block_of[static_cast<std::size_t>(info.row_at[static_cast<std::size_t>(b)])] = b;

  const Matrix xt = data.x().transpose();
  info.k.resize(n, n);
  for (Index b = 0; b < n; ++b) {
    const Index rb = info.row_at[static_cast<std::size_t>(b)];
    info.k(b, b) = 1.0 + lambda;
    for (Index a = b + 1; a < n; ++a) {
      const Index ra = info.row_at[static_cast<std::size_t>(a)];
      const double sign = ((a < info.n1) == (b < info.n1)) ? 1.0 : -1.0;
      const double v = sign * std::exp(-squared_distance(xt.col(ra), xt.col(rb)) / bw.sigma2());
      info.k(a, b) = v;
      info.k(b, a) = v;
    }
  }
  return info;
}

double rw_stat(const Dataset& data, const BalanceWeights& w, Bandwidth bw) {
  check_weight_dims(data, w);
  const Matrix x1 = data.treated_x();
  const Matrix x0 = data.control_x();
  const double tt = w.p.dot(gram(x1, x1, bw) * w.p);
  const double cc = w.q.dot(gram(x0, x0, bw) * w.q);
  const double tc = w.p.dot(gram(x1, x0, bw) * w.q);
  return tt + cc - 2.0 * tc;
}

double kernel_distance(const Dataset& data, const BalanceWeights& w, Bandwidth bw) {
  const double rw = rw_stat(data, w, bw);
  if (rw < -1e-10) throw Error(ErrorCode::kNumericalBreakdown, "negative kernel two-sample statistic");
  return std::sqrt(std::max(rw, 0.0));
}

double witness_eval(const Eigen::Ref<const Vector>& x, const Dataset& data, const BalanceWeights& w,
                    Bandwidth bw) {
  if (x.size() != data.dim()) throw Error(ErrorCode::kDimensionMismatch, "witness point has wrong dimension");
  const double kd = kernel_distance(data, w, bw);
  if (kd <= 1e-12) throw Error(ErrorCode::kDegenerateWitness, "kernel distance is zero; witness undefined");
  const Vector s = signed_weights(data, w);
  double acc = 0.0;
  for (Index i = 0; i < data.size(); ++i) {
    acc += s(i) * gaussian_kernel(x, data.x().row(i).transpose(), bw);
  }
  return acc / kd;
}

}  // namespace kdb
