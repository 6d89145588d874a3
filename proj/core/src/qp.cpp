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

#include "kdb/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "kdb/error.hpp"

namespace kdb {
namespace {

constexpr double kRankTol = 1e-10;
constexpr double kFeasTol = 1e-9;
constexpr int kMaxRidgeEscalations = 6;

struct FactorFailure {};

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

bool all_finite(const Matrix& m) { return m.allFinite(); }

/// Numerical rank of the rows of a via column-pivoted QR of a'.
Index row_rank(const Matrix& a) {
  if (a.rows() == 0) return 0;
  Eigen::ColPivHouseholderQR<Matrix> qr(a.transpose());
  const auto& r = qr.matrixR();
  const Index diag = std::min(r.rows(), r.cols());
  if (diag == 0) return 0;
  const double lead = std::abs(r(0, 0));
  Index rank = 0;
  for (Index i = 0; i < diag; ++i) {
    if (std::abs(r(i, i)) > kRankTol * std::max(1.0, lead)) ++rank;
  }
  return rank;
}

/// Cholesky factor of Q(F, F) + ridge I for a changing index set F. Rows and
/// columns are kept in the order of F.
class FreeCholesky {
 public:
  explicit FreeCholesky(Index capacity) : l_(capacity, capacity) {}

  Index size() const noexcept { return k_; }
  void clear() noexcept { k_ = 0; }

  /// col holds Q(F_j, new) for the current members; diag includes the ridge.
  bool append(const Vector& col, double diag, double pivot_tol) {
    Vector l = col.head(k_);
    if (k_ > 0) l_.topLeftCorner(k_, k_).triangularView<Eigen::Lower>().solveInPlace(l);
    const double d2 = diag - l.squaredNorm();
    if (!(d2 > pivot_tol)) return false;
    l_.row(k_).head(k_) = l.transpose();
    l_(k_, k_) = std::sqrt(d2);
    ++k_;
    return true;
  }

  void remove(Index pos) {
    const Index r = k_ - pos - 1;
    if (r > 0) {
      Vector x = l_.col(pos).segment(pos + 1, r);
      // Rank-one update of the trailing factor: T T' + x x'.
      auto t = l_.block(pos + 1, pos + 1, r, r);
      for (Index j = 0; j < r; ++j) {
        const double a = t(j, j);
        const double b = x(j);
        const double rr = std::hypot(a, b);
        const double c = rr / a;
        const double s = b / a;
        t(j, j) = rr;
        const Index rest = r - j - 1;
        if (rest > 0) {
          t.col(j).tail(rest) = (t.col(j).tail(rest) + s * x.tail(rest)) / c;
          x.tail(rest) = c * x.tail(rest) - s * t.col(j).tail(rest);
        }
      }
      for (Index i = pos; i < k_ - 1; ++i) l_.row(i).head(pos) = l_.row(i + 1).head(pos);
      Matrix moved = l_.block(pos + 1, pos + 1, r, r).triangularView<Eigen::Lower>();
      l_.block(pos, pos, r, r) = moved;
    }
    --k_;
  }

  double entry(Index i, Index j) const { return l_(i, j); }

  /// v <- L^{-1} v (rows of v beyond size() are ignored).
  template <typename Derived>
  void forward(Eigen::MatrixBase<Derived>& v) const {
    if (k_ == 0) return;
    l_.topLeftCorner(k_, k_).triangularView<Eigen::Lower>().solveInPlace(v);
  }

  template <typename Derived>
  void backward(Eigen::MatrixBase<Derived>& v) const {
    if (k_ == 0) return;
    l_.topLeftCorner(k_, k_).transpose().triangularView<Eigen::Upper>().solveInPlace(v);
  }

 private:
  Matrix l_;
  Index k_ = 0;
};

/// Lawson-Hanson NNLS for min ||A x - b||, x_i >= 0 on masked entries.
Vector nonneg_least_squares(const Matrix& a, const Vector& b, const std::vector<bool>& nonneg) {
  const Index n = a.cols();
  Vector x = Vector::Zero(n);
  if (a.rows() == 0) return x;

  std::vector<Index> passive;
  std::vector<char> in_passive(static_cast<std::size_t>(n), 0);
  std::vector<char> excluded(static_cast<std::size_t>(n), 0);
  for (Index j = 0; j < n; ++j) {
    if (!nonneg[static_cast<std::size_t>(j)]) {
      passive.push_back(j);
      in_passive[static_cast<std::size_t>(j)] = 1;
    }
  }

  auto solve_passive = [&](Vector& z) {
    z = Vector::Zero(n);
    if (passive.empty()) return;
    Matrix ap(a.rows(), static_cast<Index>(passive.size()));
    for (std::size_t k = 0; k < passive.size(); ++k) ap.col(static_cast<Index>(k)) = a.col(passive[k]);
    Vector zp = ap.completeOrthogonalDecomposition().solve(b);
    for (std::size_t k = 0; k < passive.size(); ++k) z(passive[k]) = zp(static_cast<Index>(k));
  };

  Vector z;
  solve_passive(z);
  x = z;

  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff()) * std::max(1.0, inf_norm(b));
  const double grad_tol = 1e-13 * scale;
  const int max_outer = static_cast<int>(3 * n + 10);

  for (int outer = 0; outer < max_outer; ++outer) {
    const Vector w = a.transpose() * (b - a * x);
    Index best = -1;
    double best_w = grad_tol;
    for (Index j = 0; j < n; ++j) {
      const auto sj = static_cast<std::size_t>(j);
      if (in_passive[sj] || excluded[sj]) continue;
      if (w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) break;
    passive.push_back(best);
    in_passive[static_cast<std::size_t>(best)] = 1;

    bool first_inner = true;
    for (int inner = 0; inner < 3 * n + 10; ++inner) {
      solve_passive(z);
      if (first_inner && z(best) <= 0.0) {
        // Rounding made the entering column useless; drop it for good.
        passive.pop_back();
        in_passive[static_cast<std::size_t>(best)] = 0;
        excluded[static_cast<std::size_t>(best)] = 1;
        break;
      }
      first_inner = false;
      double alpha = 1.0;
      bool feasible = true;
      for (Index j : passive) {
        if (!nonneg[static_cast<std::size_t>(j)] || z(j) > 0.0) continue;
        feasible = false;
        const double denom = x(j) - z(j);
        if (denom > 0.0) alpha = std::min(alpha, x(j) / denom);
      }
      if (feasible) {
        x = z;
        break;
      }
      x += alpha * (z - x);
      std::vector<Index> kept;
      for (Index j : passive) {
        if (nonneg[static_cast<std::size_t>(j)] && x(j) <= 1e-15 * std::max(1.0, inf_norm(x))) {
          x(j) = 0.0;
          in_passive[static_cast<std::size_t>(j)] = 0;
        } else {
          kept.push_back(j);
        }
      }
      passive.swap(kept);
    }
  }
  for (Index j = 0; j < n; ++j) {
    if (nonneg[static_cast<std::size_t>(j)] && x(j) < 0.0) x(j) = 0.0;
  }
  return x;
}

bool is_feasible(const QuadraticProgram& prob, const Vector& x) {
  if (x.size() != prob.size() || !x.allFinite()) return false;
  for (Index i = 0; i < x.size(); ++i) {
    if (prob.nonneg()[static_cast<std::size_t>(i)] && x(i) < 0.0) return false;
  }
  if (prob.num_equalities() == 0) return true;
  const double res = inf_norm(prob.aeq() * x - prob.beq());
  return res <= kFeasTol * std::max(1.0, inf_norm(prob.beq()));
}

enum class RunOutcome { kConverged, kMaxIterations };

/// One active-set run at a fixed ridge, starting from a feasible x.
class ActiveSetRun {
 public:
  ActiveSetRun(const QuadraticProgram& prob, double ridge, double pivot_tol, const QPOptions& options,
               int& iterations, std::vector<QPTraceEntry>* trace)
      : prob_(prob),
        ridge_(ridge),
        pivot_tol_(pivot_tol),
        options_(options),
        iterations_(iterations),
        trace_(trace),
        n_(prob.size()),
        m_(prob.num_equalities()),
        chol_(prob.size()),
        in_free_(static_cast<std::size_t>(prob.size()), 0),
        stuck_(static_cast<std::size_t>(prob.size()), 0) {}

  RunOutcome run(Vector& x) {
    free_.clear();
    for (Index i = 0; i < n_; ++i) {
      if (!prob_.nonneg()[static_cast<std::size_t>(i)] || x(i) > 0.0) add_free(i);
    }
    rebuild_projection();

    const double mult_tol = 1e-11 * std::max(1.0, grad_scale());
    bool at_optimum = false;
    Vector y;
    Vector nu = Vector::Zero(m_);

    while (iterations_ < options_.max_iterations) {
      ++iterations_;
      if (!at_optimum) {
        solve_subproblem(y, nu);
        const Index k = static_cast<Index>(free_.size());
        Vector xf(k);
        for (Index a = 0; a < k; ++a) xf(a) = x(free_[static_cast<std::size_t>(a)]);
        const Vector p = y - xf;

        double alpha = 1.0;
        Index block_pos = -1;
        for (Index a = 0; a < k; ++a) {
          const Index i = free_[static_cast<std::size_t>(a)];
          if (!prob_.nonneg()[static_cast<std::size_t>(i)] || p(a) >= 0.0) continue;
          const double ratio = xf(a) / -p(a);
          if (ratio < alpha) {
            alpha = ratio;
            block_pos = a;
          }
        }
        if (alpha > 0.0) std::fill(stuck_.begin(), stuck_.end(), 0);
        for (Index a = 0; a < k; ++a) {
          const Index i = free_[static_cast<std::size_t>(a)];
          x(i) = block_pos < 0 ? y(a) : xf(a) + alpha * p(a);
          if (prob_.nonneg()[static_cast<std::size_t>(i)] && x(i) < 0.0) x(i) = 0.0;
        }
        if (block_pos >= 0) {
          const Index i = free_[static_cast<std::size_t>(block_pos)];
          x(i) = 0.0;
          if (alpha == 0.0 && i == last_released_) stuck_[static_cast<std::size_t>(i)] = 1;
          remove_free(block_pos);
        } else {
          at_optimum = true;
        }
        record(x);
        continue;
      }

      // x solves the subproblem on the current free set: price the bounds.
      const Vector g = prob_.q() * x + prob_.c() + prob_.aeq().transpose() * nu;
      Index enter = -1;
      double most_negative = -mult_tol;
      for (Index j = 0; j < n_; ++j) {
        const auto sj = static_cast<std::size_t>(j);
        if (in_free_[sj] || stuck_[sj]) continue;
        if (g(j) < most_negative) {
          most_negative = g(j);
          enter = j;
        }
      }
      if (enter < 0) return RunOutcome::kConverged;
      last_released_ = enter;
      add_free(enter);
      extend_projection();
      at_optimum = false;
    }
    return RunOutcome::kMaxIterations;
  }

  const std::vector<Index>& free_set() const { return free_; }

 private:
  double grad_scale() const {
    return std::max({prob_.q().cwiseAbs().maxCoeff(), inf_norm(prob_.c()),
                     m_ > 0 ? prob_.aeq().cwiseAbs().maxCoeff() : 0.0});
  }

  void add_free(Index j) {
    const Index k = static_cast<Index>(free_.size());
    Vector col(k + 1);
    for (Index a = 0; a < k; ++a) col(a) = prob_.q()(free_[static_cast<std::size_t>(a)], j);
    if (!chol_.append(col, prob_.q()(j, j) + ridge_, pivot_tol_)) throw FactorFailure{};
    free_.push_back(j);
    in_free_[static_cast<std::size_t>(j)] = 1;
  }

  void remove_free(Index pos) {
    in_free_[static_cast<std::size_t>(free_[static_cast<std::size_t>(pos)])] = 0;
    free_.erase(free_.begin() + pos);
    chol_.remove(pos);
    rebuild_projection();
  }

  /// A_F' for the current free set.
  Matrix gather_rhs() const {
    const Index k = static_cast<Index>(free_.size());
    Matrix g(k, m_);
    for (Index a = 0; a < k; ++a) g.row(a) = prob_.aeq().col(free_[static_cast<std::size_t>(a)]).transpose();
    return g;
  }

  /// proj_ = L^{-1} A_F'.
  void rebuild_projection() {
    proj_ = gather_rhs();
    chol_.forward(proj_);
  }

  /// Appends the row for the newest free variable: (a_k' - l' proj) / l_kk.
  void extend_projection() {
    const Index k = static_cast<Index>(free_.size());
    Eigen::RowVectorXd row = prob_.aeq().col(free_.back()).transpose();
    for (Index a = 0; a < k - 1; ++a) row -= chol_.entry(k - 1, a) * proj_.row(a);
    row /= chol_.entry(k - 1, k - 1);
    Matrix next(k, m_);
    next.topRows(k - 1) = proj_;
    next.row(k - 1) = row;
    proj_.swap(next);
  }

  Vector gathered_q_times(const Vector& y) const {
    const Index k = static_cast<Index>(free_.size());
    Vector out = Vector::Zero(k);
    for (Index b = 0; b < k; ++b) {
      const Index j = free_[static_cast<std::size_t>(b)];
      const double yb = y(b);
      if (yb == 0.0) continue;
      for (Index a = 0; a < k; ++a) out(a) += prob_.q()(free_[static_cast<std::size_t>(a)], j) * yb;
    }
    return out + ridge_ * y;
  }

  /// Equality-constrained subproblem on the free set via the Schur
  /// complement, followed by iterative refinement against the original Q.
  void solve_subproblem(Vector& y, Vector& nu) {
    const Index k = static_cast<Index>(free_.size());
    const Matrix& v = proj_;
    Eigen::CompleteOrthogonalDecomposition<Matrix> schur;
    if (m_ > 0) schur.compute(v.transpose() * v);

    auto solve = [&](const Vector& r1, const Vector& r2, Vector& dy, Vector& dnu) {
      // [H A'; A 0][dy; dnu] = [r1; r2]
      Vector w = r1;
      chol_.forward(w);
      if (m_ > 0) {
        dnu = schur.solve(v.transpose() * w - r2);
        w -= v * dnu;
      } else {
        dnu = Vector::Zero(0);
      }
      chol_.backward(w);
      dy = w;
    };

    Vector af_b = prob_.beq();
    Vector rhs1(k);
    for (Index a = 0; a < k; ++a) rhs1(a) = -prob_.c()(free_[static_cast<std::size_t>(a)]);
    solve(rhs1, af_b, y, nu);

    Matrix af(m_, k);
    for (Index a = 0; a < k; ++a) af.col(a) = prob_.aeq().col(free_[static_cast<std::size_t>(a)]);
    for (int pass = 0; pass < 2; ++pass) {
      const Vector r1 = rhs1 - gathered_q_times(y) - af.transpose() * nu;
      const Vector r2 = af_b - af * y;
      if (inf_norm(r1) <= 1e-15 && inf_norm(r2) <= 1e-15) break;
      Vector dy, dnu;
      solve(r1, r2, dy, dnu);
      y += dy;
      nu += dnu;
    }
    if (m_ == 0) nu = Vector::Zero(0);
  }

  void record(const Vector& x) {
    if (trace_ == nullptr) return;
    QPTraceEntry e;
    e.iteration = iterations_;
    e.objective = prob_.objective(x) + 0.5 * ridge_ * x.squaredNorm();
    e.ridge = ridge_;
    e.free_count = static_cast<Index>(free_.size());
    e.primal_residual = m_ > 0 ? inf_norm(prob_.aeq() * x - prob_.beq()) : 0.0;
    trace_->push_back(e);
  }

  const QuadraticProgram& prob_;
  double ridge_;
  double pivot_tol_;
  const QPOptions& options_;
  int& iterations_;
  std::vector<QPTraceEntry>* trace_;
  Index n_;
  Index m_;
  FreeCholesky chol_;
  std::vector<Index> free_;
  std::vector<char> in_free_;
  std::vector<char> stuck_;
  Index last_released_ = -1;
  Matrix proj_;
};

/// Multipliers for the unridged problem at x: least-squares nu on the free
/// set, then bound multipliers from stationarity on the active bounds.
void recover_multipliers(const QuadraticProgram& prob, const Vector& x,
                         const std::vector<Index>& free_set, QPSolution& sol) {
  const Index n = prob.size();
  const Index m = prob.num_equalities();
  const Vector g = prob.q() * x + prob.c();
  std::vector<char> is_free(static_cast<std::size_t>(n), 0);
  for (Index i : free_set) is_free[static_cast<std::size_t>(i)] = 1;
  for (Index i = 0; i < n; ++i) {
    if (!prob.nonneg()[static_cast<std::size_t>(i)]) is_free[static_cast<std::size_t>(i)] = 1;
  }

  sol.dual_eq = Vector::Zero(m);
  if (m > 0 && !free_set.empty()) {
    const Index k = static_cast<Index>(free_set.size());
    Matrix aft(k, m);
    Vector gf(k);
    for (Index a = 0; a < k; ++a) {
      aft.row(a) = prob.aeq().col(free_set[static_cast<std::size_t>(a)]).transpose();
      gf(a) = g(free_set[static_cast<std::size_t>(a)]);
    }
    sol.dual_eq = aft.completeOrthogonalDecomposition().solve(-gf);
  }
  const Vector full = m > 0 ? Vector(g + prob.aeq().transpose() * sol.dual_eq) : g;
  sol.dual_ineq = Vector::Zero(n);
  for (Index i = 0; i < n; ++i) {
    if (!is_free[static_cast<std::size_t>(i)]) sol.dual_ineq(i) = full(i);
  }
}

}  // namespace

const char* to_string(QPStatus status) noexcept {
  switch (status) {
    case QPStatus::kOptimal: return "Optimal";
    case QPStatus::kMaxIterations: return "MaxIterations";
    case QPStatus::kInfeasible: return "Infeasible";
  }
  return "Unknown";
}

QuadraticProgram::QuadraticProgram(Matrix q, Vector c, Matrix aeq, Vector beq, std::vector<bool> nonneg)
    : q_(std::move(q)), c_(std::move(c)), aeq_(std::move(aeq)), beq_(std::move(beq)), nonneg_(std::move(nonneg)) {
  const Index n = q_.rows();
  if (q_.cols() != n || c_.size() != n || static_cast<Index>(nonneg_.size()) != n) {
    throw Error(ErrorCode::kDimensionMismatch, "QP objective dimensions disagree");
  }
  if (aeq_.rows() == 0 && aeq_.cols() == 0) aeq_.resize(0, n);
  if (aeq_.cols() != n || beq_.size() != aeq_.rows()) {
    throw Error(ErrorCode::kDimensionMismatch, "QP equality block dimensions disagree");
  }
  if (!all_finite(q_) || !c_.allFinite() || !all_finite(aeq_) || !beq_.allFinite()) {
    throw Error(ErrorCode::kNonFiniteValue, "QP data contains non-finite entries");
  }
  const double qscale = std::max(1.0, n > 0 ? q_.cwiseAbs().maxCoeff() : 0.0);
  if (n > 0 && (q_ - q_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * qscale) {
    throw Error(ErrorCode::kInvalidArgument, "Q is not symmetric");
  }
  q_ = 0.5 * (q_ + q_.transpose());

  const Index m = aeq_.rows();
  if (m > 0 && row_rank(aeq_) < m) {
    const Vector ls = aeq_.completeOrthogonalDecomposition().solve(beq_);
    const double res = inf_norm(aeq_ * ls - beq_);
    if (res <= kFeasTol * std::max(1.0, inf_norm(beq_))) {
      throw Error(ErrorCode::kRankDeficient, "equality constraints are linearly dependent");
    }
    consistent_ = false;
  }
}

QuadraticProgram::QuadraticProgram(Matrix q, Matrix aeq, Vector beq)
    : QuadraticProgram(q, Vector::Zero(q.rows()), std::move(aeq), std::move(beq),
                       std::vector<bool>(static_cast<std::size_t>(q.rows()), true)) {}

double QuadraticProgram::objective(const Vector& x) const {
  return 0.5 * x.dot(q_ * x) + c_.dot(x);
}

double KKTResiduals::max() const noexcept {
  return std::max({stationarity, primal_eq, primal_bound, complementarity, dual_feas});
}

KKTResiduals kkt_residuals(const QuadraticProgram& prob, const QPSolution& sol) {
  const Index n = prob.size();
  const Index m = prob.num_equalities();
  if (sol.x.size() != n || sol.dual_ineq.size() != n || sol.dual_eq.size() != m) {
    throw Error(ErrorCode::kDimensionMismatch, "solution does not match problem dimensions");
  }
  KKTResiduals r;
  Vector stat = prob.q() * sol.x + prob.c() - sol.dual_ineq;
  if (m > 0) stat += prob.aeq().transpose() * sol.dual_eq;
  r.stationarity = inf_norm(stat);
  r.primal_eq = m > 0 ? inf_norm(prob.aeq() * sol.x - prob.beq()) : 0.0;
  for (Index i = 0; i < n; ++i) {
    const bool bounded = prob.nonneg()[static_cast<std::size_t>(i)];
    if (bounded) {
      r.primal_bound = std::max(r.primal_bound, -sol.x(i));
      r.dual_feas = std::max(r.dual_feas, -sol.dual_ineq(i));
      r.complementarity = std::max(r.complementarity, std::abs(sol.dual_ineq(i) * sol.x(i)));
    } else {
      // Unbounded variables carry no bound multiplier.
      r.dual_feas = std::max(r.dual_feas, std::abs(sol.dual_ineq(i)));
    }
  }
  return r;
}

double dual_objective(const QuadraticProgram& prob, const Vector& lambda, const Vector& nu) {
  const Index n = prob.size();
  if (lambda.size() != n || nu.size() != prob.num_equalities()) {
    throw Error(ErrorCode::kDimensionMismatch, "multiplier dimensions do not match problem");
  }
  Eigen::LLT<Matrix> llt(prob.q());
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kSingularQ, "Q is not positive definite");
  }
  const Vector d = llt.matrixL().toDenseMatrix().diagonal();
  if (n > 0 && d.minCoeff() * d.minCoeff() <= 1e-14 * d.cwiseAbs2().maxCoeff()) {
    throw Error(ErrorCode::kSingularQ, "Q is numerically singular");
  }
  Vector r = prob.c() - lambda;
  if (prob.num_equalities() > 0) r += prob.aeq().transpose() * nu;
  return -0.5 * r.dot(llt.solve(r)) - (prob.num_equalities() > 0 ? nu.dot(prob.beq()) : 0.0);
}

QPSolution solve_qp(const QuadraticProgram& prob, const std::optional<Vector>& warm_start,
                    const QPOptions& options) {
  const Index n = prob.size();
  QPSolution sol;
  sol.dual_eq = Vector::Zero(prob.num_equalities());
  sol.dual_ineq = Vector::Zero(n);

  Vector x;
  if (warm_start && is_feasible(prob, *warm_start)) {
    x = *warm_start;
  } else if (!prob.equalities_consistent()) {
    x = Vector::Zero(n);
  } else {
    x = nonneg_least_squares(prob.aeq(), prob.beq(), prob.nonneg());
  }
  if (!prob.equalities_consistent() || !is_feasible(prob, x)) {
    sol.x = x;
    sol.status = QPStatus::kInfeasible;
    sol.objective = prob.objective(x);
    sol.kkt_residual = prob.num_equalities() > 0 ? inf_norm(prob.aeq() * x - prob.beq()) : 0.0;
    return sol;
  }

  const double mean_diag = n > 0 ? prob.q().trace() / static_cast<double>(n) : 0.0;
  const double scale = mean_diag > 0.0 ? mean_diag : 1.0;
  const double pivot_tol = 1e-12 * scale;
  double ridge = 0.0;
  std::vector<QPTraceEntry>* trace = options.record_trace ? &sol.trace : nullptr;

  for (int attempt = 0; attempt <= kMaxRidgeEscalations + 1; ++attempt) {
    ActiveSetRun run(prob, ridge, pivot_tol, options, sol.iterations, trace);
    Vector candidate = x;
    try {
      const RunOutcome outcome = run.run(candidate);
      sol.x = candidate;
      sol.ridge = ridge;
      recover_multipliers(prob, candidate, run.free_set(), sol);
      sol.objective = prob.objective(candidate);
      sol.kkt_residual = kkt_residuals(prob, sol).max();
      if (outcome == RunOutcome::kMaxIterations) {
        sol.status = QPStatus::kMaxIterations;
        return sol;
      }
      if (sol.kkt_residual <= options.tolerance) {
        sol.status = QPStatus::kOptimal;
        return sol;
      }
      x = candidate;
    } catch (const FactorFailure&) {
      // Keep the last feasible iterate as the next starting point.
      if (is_feasible(prob, candidate)) x = candidate;
    }
    ridge = ridge == 0.0 ? 1e-10 * scale : ridge * 10.0;
  }
  throw Error(ErrorCode::kNumericalBreakdown,
              "active-set factorisation failed after ridge escalation");
}

void write_trace(std::ostream& out, const QPSolution& sol) {
  out << "iteration\tobjective\tridge\tfree\tprimal_residual\n";
  out.precision(17);
  for (const auto& e : sol.trace) {
    out << e.iteration << '\t' << e.objective << '\t' << e.ridge << '\t' << e.free_count << '\t'
        << e.primal_residual << '\n';
  }
}

}  // namespace kdb
