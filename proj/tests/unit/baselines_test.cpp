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

#include <cmath>
#include <random>

#include "kdb/balancing.hpp"
#include "kdb/baselines.hpp"
#include "kdb/error.hpp"
#include "support.hpp"

namespace kdb {
namespace {

PropensityModel constant_model(const Dataset& d, double e) {
  PropensityModel m;
  m.fitted = Vector::Constant(d.size(), e);
  m.coefficients = Vector::Zero(d.dim() + 1);
  m.converged = true;
  return m;
}

Dataset logistic_data(std::mt19937_64& gen, Index n, double b0, double b1) {
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> u;
  Matrix x(n, 1);
  Vector t(n);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = normal(gen);
    t(i) = u(gen) < 1.0 / (1.0 + std::exp(-(b0 + b1 * x(i, 0)))) ? 1.0 : 0.0;
  }
  return Dataset::validate(x, t, Vector::Zero(n));
}

TEST(Logistic, IndependentCovariate) {
  std::mt19937_64 gen(1);
  const Dataset d = logistic_data(gen, 2000, 0.0, 0.0);
  const PropensityModel m = fit_propensity_logistic(d);
  ASSERT_TRUE(m.converged);
  const double share = static_cast<double>(d.n1()) / static_cast<double>(d.size());
  EXPECT_NEAR(m.coefficients(0), std::log(share / (1.0 - share)), 0.1);
  EXPECT_NEAR(m.coefficients(1), 0.0, 0.1);
}

TEST(Logistic, RecoversKnownCoefficients) {
  std::mt19937_64 gen(2);
  const Dataset d = logistic_data(gen, 5000, 0.0, 1.0);
  const PropensityModel m = fit_propensity_logistic(d);
  ASSERT_TRUE(m.converged);
  EXPECT_NEAR(m.coefficients(0), 0.0, 0.15);
  EXPECT_NEAR(m.coefficients(1), 1.0, 0.15);
  for (std::size_t k = 1; k < m.log_likelihood.size(); ++k) {
    EXPECT_GE(m.log_likelihood[k], m.log_likelihood[k - 1]);
  }
  EXPECT_GE(m.fitted.minCoeff(), 1e-6);
  EXPECT_LE(m.fitted.maxCoeff(), 1.0 - 1e-6);
}

TEST(Logistic, PerfectSeparationIsFlagged) {
  const Dataset d = testing::make_dataset({2.0, 3.0, 4.0}, {-1.0, -2.0, 0.0});
  const PropensityModel m = fit_propensity_logistic(d);
  EXPECT_FALSE(m.converged);
  EXPECT_TRUE(m.separation);
  EXPECT_GE(m.fitted.minCoeff(), 1e-6);
  EXPECT_LE(m.fitted.maxCoeff(), 1.0 - 1e-6);
}

TEST(IpwAte, ConstantPropensityIsUniform) {
  std::mt19937_64 gen(3);
  const Dataset d = testing::random_dataset(gen, 11, 2);
  const BalanceWeights w = ipw_ate_weights(constant_model(d, 0.5), d);
  EXPECT_LE((w.p.array() - 1.0 / d.n1()).abs().maxCoeff(), 1e-15);
  EXPECT_LE((w.q.array() - 1.0 / d.n0()).abs().maxCoeff(), 1e-15);
  EXPECT_NEAR(estimate_ate(d, w), estimate_ate(d, unadjusted_weights(d)), 1e-12);
}

TEST(IpwAte, HandNormalisation) {
  const Dataset d = testing::make_dataset({0.0, 1.0}, {2.0});
  PropensityModel m = constant_model(d, 0.5);
  m.fitted(0) = 0.8;
  m.fitted(1) = 0.2;
  const BalanceWeights w = ipw_ate_weights(m, d);
  EXPECT_NEAR(w.p(0), 0.2, 1e-15);
  EXPECT_NEAR(w.p(1), 0.8, 1e-15);
  EXPECT_NEAR(w.p.sum(), 1.0, 1e-12);
  EXPECT_NEAR(w.q.sum(), 1.0, 1e-12);
  EXPECT_EQ(w.scheme, WeightScheme::kIpwAte);
}

TEST(IpwAtt, OddsWeights) {
  const Dataset d = testing::make_dataset({0.0, 1.0}, {2.0, 3.0, 4.0});
  const BalanceWeights half = ipw_att_weights(constant_model(d, 0.5), d);
  EXPECT_NEAR(half.q.sum(), 3.0 / 2.0, 1e-15);
  EXPECT_EQ(half.p(0), 0.5);
  PropensityModel m = constant_model(d, 0.5);
  m.fitted(2) = 0.75;
  m.fitted(3) = 0.8;
  const BalanceWeights w = ipw_att_weights(m, d);
  EXPECT_NEAR(w.q(0), 1.5, 1e-15);
  EXPECT_GT(w.q(1), w.q(0));
  EXPECT_NO_THROW(w.check_invariants());
  const BalanceWeights normalized = ipw_att_weights(m, d, true);
  EXPECT_NEAR(normalized.q.sum(), 1.0, 1e-15);
}

TEST(Unadjusted, UniformAndPermutationInvariant) {
  std::mt19937_64 gen(4);
  const Dataset d = testing::random_dataset(gen, 8, 2);
  const BalanceWeights w = unadjusted_weights(d);
  EXPECT_EQ(w.p(0), 1.0 / d.n1());
  const double est = estimate_ate(d, w);
  std::vector<Index> perm(static_cast<std::size_t>(d.size()));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::reverse(perm.begin(), perm.end());
  const Dataset r = d.rows(perm);
  EXPECT_NEAR(estimate_ate(r, unadjusted_weights(r)), est, 1e-12);
  const Dataset four = testing::make_dataset({0, 1, 2, 3}, {0});
  EXPECT_EQ(unadjusted_weights(four).p, Vector::Constant(4, 0.25));
}

TEST(Oracle, ConstantEffect) {
  Matrix x(3, 1);
  x << 0, 1, 2;
  Vector t(3), y0(3);
  t << 1, 0, 1;
  y0 << 1, 5, -2;
  const Vector y1 = (y0.array() + 20.0).matrix();
  const Vector y = (t.array() * y1.array() + (1 - t.array()) * y0.array()).matrix();
  const Dataset d = Dataset::validate(x, t, y, y0, y1);
  EXPECT_NEAR(oracle_ate(d), 20.0, 1e-12);
  EXPECT_NEAR(oracle_att(d), oracle_ate(d), 1e-12);
  try {
    oracle_ate(testing::make_dataset({0}, {1}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingPotentialOutcomes);
  }
}

TEST(Oracle, SingleTreatedUnit) {
  Matrix x(2, 1);
  x << 0, 1;
  Vector t(2), y0(2), y1(2), y(2);
  t << 1, 0;
  y0 << 1, 0;
  y1 << 3, 9;
  y << 3, 0;
  EXPECT_EQ(oracle_att(Dataset::validate(x, t, y, y0, y1)), 2.0);
}

}  // namespace
}  // namespace kdb
