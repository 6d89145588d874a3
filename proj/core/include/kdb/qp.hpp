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

#ifndef KDB_QP_HPP
#define KDB_QP_HPP

#include <iosfwd>
#include <optional>
#include <vector>

#include "kdb/types.hpp"

namespace kdb {

/// minimize    1/2 x'Qx + c'x
/// subject to  Aeq x = beq,  x_i >= 0 for every i with nonneg[i].
///
/// Q must be symmetric positive semi-definite. Equality rows must be
/// linearly independent unless they are inconsistent, in which case the
/// problem is kept and reported Infeasible by solve_qp.
class QuadraticProgram {
 public:
  QuadraticProgram(Matrix q, Vector c, Matrix aeq, Vector beq, std::vector<bool> nonneg);
  /// All variables nonnegative, no linear term.
  QuadraticProgram(Matrix q, Matrix aeq, Vector beq);

  const Matrix& q() const noexcept { return q_; }
  const Vector& c() const noexcept { return c_; }
  const Matrix& aeq() const noexcept { return aeq_; }
  const Vector& beq() const noexcept { return beq_; }
  const std::vector<bool>& nonneg() const noexcept { return nonneg_; }
  Index size() const noexcept { return q_.rows(); }
  Index num_equalities() const noexcept { return aeq_.rows(); }

  /// False when the equality rows are dependent and contradict each other.
  bool equalities_consistent() const noexcept { return consistent_; }

  double objective(const Vector& x) const;

 private:
  Matrix q_;
  Vector c_;
  Matrix aeq_;
  Vector beq_;
  std::vector<bool> nonneg_;
  bool consistent_ = true;
};

enum class QPStatus { kOptimal, kMaxIterations, kInfeasible };

const char* to_string(QPStatus status) noexcept;

struct QPTraceEntry {
  int iteration = 0;
  double objective = 0.0;  // objective of the ridged problem being solved
  double ridge = 0.0;
  Index free_count = 0;
  double primal_residual = 0.0;
};

/// Multipliers follow the Lagrangian
///   1/2 x'Qx + c'x - dual_ineq'x + dual_eq'(Aeq x - beq),
/// so stationarity reads Qx + c - dual_ineq + Aeq' dual_eq = 0.
struct QPSolution {
  Vector x;
  Vector dual_eq;
  Vector dual_ineq;
  double objective = 0.0;
  QPStatus status = QPStatus::kInfeasible;
  int iterations = 0;
  double kkt_residual = 0.0;
  double ridge = 0.0;  // diagonal shift that produced x (0 if none was needed)
  std::vector<QPTraceEntry> trace;
};

struct QPOptions {
  int max_iterations = 50000;
  double tolerance = 1e-8;
  bool record_trace = false;
};

/// Primal active-set solver. A Lawson-Hanson NNLS pass finds a feasible
/// start (or proves infeasibility); the working set then changes one bound
/// at a time. Q is shifted by an adaptive ridge when the free block loses
/// positive definiteness: 1e-10 * trace(Q)/n, escalated x10 at most 6 times.
/// Throws kNumericalBreakdown if every escalation fails.
QPSolution solve_qp(const QuadraticProgram& prob,
                    const std::optional<Vector>& warm_start = std::nullopt,
                    const QPOptions& options = {});

/// Infinity-norm residuals of the KKT system at sol.
struct KKTResiduals {
  double stationarity = 0.0;
  double primal_eq = 0.0;
  double primal_bound = 0.0;
  double complementarity = 0.0;
  double dual_feas = 0.0;

  double max() const noexcept;
};

KKTResiduals kkt_residuals(const QuadraticProgram& prob, const QPSolution& sol);

/// Lagrange dual function
///   g(lambda, nu) = -1/2 r' Q^{-1} r - nu'beq,   r = c - lambda + Aeq' nu.
/// Requires Q positive definite; throws kSingularQ otherwise.
double dual_objective(const QuadraticProgram& prob, const Vector& lambda, const Vector& nu);

/// Writes the iteration trace as tab-separated text with a header row.
void write_trace(std::ostream& out, const QPSolution& sol);

}  // namespace kdb

#endif  // KDB_QP_HPP
