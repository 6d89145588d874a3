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

#include <gtest/gtest.h>

#include <random>

#include "kdb/balancing.hpp"
#include "kdb/error.hpp"
#include "support.hpp"

namespace kdb {
namespace {

BalanceWeights solve(const Dataset& d, Target target, MomentConstraints m, double lambda = 0.0) {
  return solve_weights(d, BalanceScheme{target, m, lambda}, median_bandwidth(d.x()));
}

Vector stack(const BalanceWeights& w) {
  Vector out(w.p.size() + w.q.size());
  out << w.p, w.q;
  return out;
}

TEST(BuildAteProblem, LayoutAndRidge) {
  std::mt19937_64 gen(1);
  const Dataset d = testing::random_dataset(gen, 10, 2);
  const Bandwidth bw = median_bandwidth(d.x());
  const BalanceProblem a = build_ate_problem(d, {Target::kATE, MomentConstraints::kFirstMoment, 0.0}, bw);
  const BalanceProblem b = build_ate_problem(d, {Target::kATE, MomentConstraints::kFirstMoment, 3.0}, bw);
  EXPECT_EQ(a.qp.num_equalities(), 4);
  EXPECT_LE((b.qp.q() - a.qp.q() - 3.0 * Matrix::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(a.qp.c().squaredNorm(), 0.0);
  const BalanceProblem c = build_ate_problem(d, {Target::kATE, MomentConstraints::kNone, 0.0}, bw);
  EXPECT_EQ(c.qp.num_equalities(), 2);
}

TEST(BuildAteProblem, DropsConstantCovariates) {
  Matrix x(4, 2);
  x << 0, 1, 1, 1, 2, 1, 3, 1;
  Vector t(4);
  t << 1, 1, 0, 0;
  const Dataset d = Dataset::validate(x, t, Vector::Zero(4));
  const BalanceProblem p = build_ate_problem(d, {Target::kATE, MomentConstraints::kFirstMoment, 0.0}, Bandwidth(1.0));
  EXPECT_EQ(p.qp.num_equalities(), 3);
  ASSERT_EQ(p.dropped_covariates.size(), 1U);
  EXPECT_EQ(p.dropped_covariates[0], 1);
  EXPECT_FALSE(p.warnings.empty());
}

TEST(SolveWeights, SingleUnitsAreForced) {
  const Dataset d = testing::make_dataset({0.0}, {1.0});
  const BalanceWeights w = solve(d, Target::kATE, MomentConstraints::kNone);
  EXPECT_NEAR(w.p(0), 1.0, 1e-12);
  EXPECT_NEAR(w.q(0), 1.0, 1e-12);
  EXPECT_EQ(w.scheme, WeightScheme::kKDBC);
}

TEST(SolveWeights, Kdm1HandSolvedCase) {
  const Dataset d = testing::make_dataset({0.0, 2.0}, {1.0});
  const BalanceWeights w = solve(d, Target::kATE, MomentConstraints::kFirstMoment);
  EXPECT_NEAR(w.q(0), 1.0, 1e-10);
  EXPECT_NEAR(w.p(0), 0.5, 1e-10);
  EXPECT_NEAR(w.p(1), 0.5, 1e-10);
  EXPECT_EQ(w.scheme, WeightScheme::kKDM1);
}

TEST(SolveWeights, AttSingleControl) {
  const Dataset d = testing::make_dataset({0.0, 2.0, 5.0}, {1.0});
  const BalanceWeights w = solve(d, Target::kATT, MomentConstraints::kNone);
  EXPECT_NEAR(w.q(0), 1.0, 1e-12);
  for (Index i = 0; i < 3; ++i) EXPECT_EQ(w.p(i), 1.0 / 3.0);
  EXPECT_EQ(w.scheme, WeightScheme::kAttKDB);
}

TEST(SolveWeights, AttIdenticalGroupsGivePerfectMatch) {
  const Dataset d = testing::make_dataset({0.0, 1.0, 2.5}, {0.0, 1.0, 2.5});
  const Bandwidth bw = median_bandwidth(d.x());
  const BalanceWeights w = solve_weights(d, {Target::kATT, MomentConstraints::kNone, 0.0}, bw);
  EXPECT_NEAR(rw_stat(d, w, bw), 0.0, 1e-8);
  for (Index j = 0; j < 3; ++j) EXPECT_NEAR(w.q(j), 1.0 / 3.0, 1e-6);
}

TEST(BuildAttProblem, LinearTermGradient) {
  std::mt19937_64 gen(2);
  const Dataset d = testing::random_dataset(gen, 12, 2);
  const Bandwidth bw = median_bandwidth(d.x());
  const BalanceProblem p = build_att_problem(d, {Target::kATT, MomentConstraints::kNone, 0.0}, bw);
  const Matrix k10 = gram(d.treated_x(), d.control_x(), bw);
  // The solver minimises half of the ATT objective, so its gradient is doubled.
  const Vector grad_at_zero = 2.0 * p.qp.c();
  const Vector expect = -(2.0 / static_cast<double>(d.n1())) * k10.transpose() * Vector::Ones(d.n1());
  EXPECT_LE((grad_at_zero - expect).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(p.qp.size(), d.n0());
  const BalanceProblem m = build_att_problem(d, {Target::kATT, MomentConstraints::kFirstMoment, 0.0}, bw);
  EXPECT_EQ(m.qp.num_equalities(), 3);
}

TEST(SolveWeights, AttObjectiveMatchesFullForm) {
  std::mt19937_64 gen(3);
  const Dataset d = testing::random_dataset(gen, 14, 2);
  const Bandwidth bw = median_bandwidth(d.x());
  const BalanceProblem p = build_att_problem(d, {Target::kATT, MomentConstraints::kNone, 0.0}, bw);
  const BalanceWeights w = solve_weights(d, {Target::kATT, MomentConstraints::kNone, 0.0}, bw);
  const double k11 = gram(d.treated_x(), d.treated_x(), bw).sum() / std::pow(static_cast<double>(d.n1()), 2);
  EXPECT_NEAR(2.0 * p.qp.objective(w.q) + k11, rw_stat(d, w, bw), 1e-10);
}

TEST(SolveWeights, InfeasibleAttMoment) {
  const Dataset d = testing::make_dataset({5.0, 5.0}, {0.0, 1.0, 2.0});
  try {
    solve(d, Target::kATT, MomentConstraints::kFirstMoment);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInfeasibleBalance);
  }
}

TEST(SolveWeights, InfeasibleAteMomentInHigherDimension) {
  Matrix x(4, 2);
  x << 0, 0, 1, 0, 10, 10, 11, 10;
  Vector t(4);
  t << 1, 1, 0, 0;
  const Dataset d = Dataset::validate(x, t, Vector::Zero(4));
  EXPECT_THROW(solve(d, Target::kATE, MomentConstraints::kFirstMoment), Error);
}

TEST(SolveWeights, KdbcBeatsUniformAndKdm1) {
  std::mt19937_64 gen(4);
  for (int r = 0; r < 10; ++r) {
    const Dataset d = testing::random_dataset(gen, 30, 3);
    const Bandwidth bw = median_bandwidth(d.x());
    const BalanceWeights kdbc = solve_weights(d, {Target::kATE, MomentConstraints::kNone, 0.0}, bw);
    const BalanceWeights kdm1 = solve_weights(d, {Target::kATE, MomentConstraints::kFirstMoment, 0.0}, bw);
    const double rw_kdbc = rw_stat(d, kdbc, bw);
    EXPECT_LE(rw_kdbc, rw_stat(d, testing::uniform_weights(d), bw) + 1e-12);
    EXPECT_LE(rw_kdbc, rw_stat(d, kdm1, bw) + 1e-10);
    EXPECT_NO_THROW(kdbc.check_invariants());
    EXPECT_NO_THROW(kdm1.check_invariants());
    const Vector diff = d.treated_x().transpose() * kdm1.p - d.control_x().transpose() * kdm1.q;
    EXPECT_LE(diff.cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(SolveWeights, StableFormsAgree) {
  std::mt19937_64 gen(5);
  for (int r = 0; r < 20; ++r) {
    const Dataset d = testing::random_dataset(gen, 24, 2);
    const Bandwidth bw = median_bandwidth(d.x());
    const InformationMatrix im = information_matrix(d, bw);
    const Index n = d.size();
    Vector w0(n);
    w0 << Vector::Constant(d.n1(), 1.0 / d.n1()), Vector::Constant(d.n0(), 1.0 / d.n0());
    Matrix a = Matrix::Zero(2, n);
    a.row(0).head(d.n1()).setOnes();
    a.row(1).tail(d.n0()).setOnes();
    for (double lambda : {0.5, 2.0}) {
      // w'Kw + lambda |w - w0|^2, written as 1/2 w'(2K + 2 lambda I)w - 2 lambda w0'w.
      const QuadraticProgram penalized(2.0 * (im.k + lambda * Matrix::Identity(n, n)), -2.0 * lambda * w0, a,
                                       Vector::Ones(2), std::vector<bool>(static_cast<std::size_t>(n), true));
      const QPSolution s = solve_qp(penalized);
      ASSERT_EQ(s.status, QPStatus::kOptimal);
      const BalanceWeights ridged = solve_weights(d, {Target::kATE, MomentConstraints::kNone, lambda}, bw);
      EXPECT_LE((s.x - stack(ridged)).cwiseAbs().maxCoeff(), 1e-6);
    }
  }
}

TEST(SolveWeights, RidgePullsTowardUniform) {
  std::mt19937_64 gen(6);
  for (int r = 0; r < 20; ++r) {
    const Dataset d = testing::random_dataset(gen, 24, 2);
    const Vector w0 = stack(testing::uniform_weights(d));
    double last = std::numeric_limits<double>::infinity();
    for (double lambda : {0.0, 1.0, 10.0, 100.0}) {
      const double dist = (stack(solve(d, Target::kATE, MomentConstraints::kNone, lambda)) - w0).norm();
      EXPECT_LE(dist, last + 1e-9);
      last = dist;
    }
  }
}

TEST(SolveBalance, ReusesBaseMatrixAcrossLambda) {
  std::mt19937_64 gen(7);
  const Dataset d = testing::random_dataset(gen, 20, 2);
  const Bandwidth bw = median_bandwidth(d.x());
  const InformationMatrix base = information_matrix(d, bw, 0.0);
  const BalanceScheme scheme{Target::kATE, MomentConstraints::kFirstMoment, 2.0};
  const BalanceResult r = solve_balance(d, scheme, base);
  const BalanceWeights direct = solve_weights(d, scheme, bw);
  EXPECT_LE((stack(r.weights) - stack(direct)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_EQ(r.weights.lambda, 2.0);
  EXPECT_LE(r.solution.kkt_residual, 1e-8);
}

TEST(Estimators, HandArithmetic) {
  Matrix x(3, 1);
  x << 0, 1, 2;
  Vector t(3), y(3);
  t << 1, 1, 0;
  y << 4, 0, 1;
  const Dataset d = Dataset::validate(x, t, y);
  BalanceWeights w;
  w.p = Vector(2);
  w.p << 0.25, 0.75;
  w.q = Vector::Ones(1);
  w.scheme = WeightScheme::kKDBC;
  EXPECT_NEAR(estimate_ate(d, w), 0.0, 1e-15);
  EXPECT_THROW(estimate_att(d, w), Error);

  Matrix x2(4, 1);
  x2 << 0, 1, 2, 3;
  Vector t2(4), y2(4);
  t2 << 1, 1, 0, 0;
  y2 << 2, 4, 1, 3;
  const Dataset d2 = Dataset::validate(x2, t2, y2);
  BalanceWeights att;
  att.p = Vector::Constant(2, 0.5);
  att.q = Vector::Constant(2, 0.5);
  att.scheme = WeightScheme::kAttKDB;
  EXPECT_NEAR(estimate_att(d2, att), 1.0, 1e-15);
  EXPECT_THROW(estimate_ate(d2, att), Error);
  att.q << 0.0, 1.0;
  EXPECT_NEAR(estimate_att(d2, att), 0.0, 1e-15);
}

TEST(Estimators, ShiftInvariance) {
  std::mt19937_64 gen(8);
  const Dataset d = testing::random_dataset(gen, 20, 2);
  const BalanceWeights w = solve(d, Target::kATE, MomentConstraints::kFirstMoment);
  const Dataset shifted = Dataset::validate(d.x(), d.t(), (d.y().array() + 123.0).matrix());
  EXPECT_NEAR(estimate_ate(d, w), estimate_ate(shifted, w), 1e-9);
  const Vector y1 = d.treated_y();
  const Vector y0 = d.control_y();
  EXPECT_NEAR(estimate_ate(d, testing::uniform_weights(d)), y1.mean() - y0.mean(), 1e-12);
}

}  // namespace
}  // namespace kdb
