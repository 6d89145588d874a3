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

#ifndef KDB_KERNEL_HPP
#define KDB_KERNEL_HPP

#include <vector>

#include "kdb/dataset.hpp"
#include "kdb/types.hpp"

namespace kdb {

/// Denominator of the Gaussian kernel exponent, exp(-||x - y||^2 / sigma2).
class Bandwidth {
 public:
  explicit Bandwidth(double sigma2);
  double sigma2() const noexcept { return sigma2_; }

 private:
  double sigma2_;
};

/// How the median of positive squared pairwise distances maps to sigma2.
enum class BandwidthRule {
  kMedianSquaredDistance,  // sigma2 = median (the usual median heuristic)
  kSquaredMedian,          // sigma2 = median^2 (literal sigma = median reading)
};

double gaussian_kernel(const Eigen::Ref<const Vector>& x,
                       const Eigen::Ref<const Vector>& y, Bandwidth bw);

/// Squared Euclidean distance, summed over coordinate differences.
double squared_distance(const Eigen::Ref<const Vector>& x,
                        const Eigen::Ref<const Vector>& y);

/// Symmetric N x N matrix of squared distances between the rows of x.
Matrix pairwise_squared_distances(const Matrix& x);

/// Median of { ||x_i - x_j||^2 : i < j, value > 0 } over all rows jointly.
/// Even counts take the midpoint of the two central values.
Bandwidth median_bandwidth(const Matrix& x,
                           BandwidthRule rule = BandwidthRule::kMedianSquaredDistance);

/// Gram matrix k(a_i, b_j).
Matrix gram(const Matrix& a, const Matrix& b, Bandwidth bw);

/// Signed kernel matrix over treated-first block order:
///   [ K1  -K10 ]
///   [ -K01  K0 ] + lambda I
struct InformationMatrix {
  Matrix k;
  Bandwidth bandwidth{1.0};
  double lambda = 0.0;
  /// block_of[i] = position of original row i in the block order.
  std::vector<Index> block_of;
  /// row_at[b] = original row sitting at block position b.
  std::vector<Index> row_at;
  Index n1 = 0;
};

InformationMatrix information_matrix(const Dataset& data, Bandwidth bw, double lambda = 0.0);

/// Weighted two-sample statistic
///   sum p_i p_j k(X1i, X1j) + sum q_i q_j k(X0i, X0j) - 2 sum p_i q_j k(X1i, X0j).
double rw_stat(const Dataset& data, const BalanceWeights& w, Bandwidth bw);

/// sqrt(max(rw, 0)). Throws kNumericalBreakdown when rw < -1e-10.
double kernel_distance(const Dataset& data, const BalanceWeights& w, Bandwidth bw);

/// Evaluates the normalised witness function
///   f(x) = sum_i s_i w_i k(x, X_i) / kernel_distance
/// with s_i = +1 for treated and -1 for control units.
double witness_eval(const Eigen::Ref<const Vector>& x, const Dataset& data,
                    const BalanceWeights& w, Bandwidth bw);

}  // namespace kdb

#endif  // KDB_KERNEL_HPP
