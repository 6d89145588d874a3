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
#include <sstream>

#include "kdb/balancing.hpp"
#include "kdb/diagnostics.hpp"
#include "kdb/error.hpp"
#include "support.hpp"

namespace kdb {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

TEST(Asmd, AteHandComputation) {
  const Dataset d = testing::make_dataset({0.0, 2.0}, {1.0, 3.0});
  EXPECT_NEAR(asmd_ate(d, testing::uniform_weights(d), 0), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Asmd, AttHandComputation) {
  const Dataset d = testing::make_dataset({0.0, 2.0}, {3.0, 7.0});
  BalanceWeights w = testing::uniform_weights(d, WeightScheme::kAttKDB);
  w.q << 1.0, 0.0;
  EXPECT_NEAR(asmd_att(d, w, 0), std::sqrt(2.0), 1e-15);
}

TEST(Asmd, AttAteRatio) {
  std::mt19937_64 gen(1);
  const Dataset d = testing::random_dataset(gen, 20, 2);
  const BalanceWeights w = testing::uniform_weights(d);
  const Vector t = d.treated_x().col(0);
  const Vector c = d.control_x().col(0);
  const auto var = [](const Vector& v) { return (v.array() - v.mean()).square().sum() / (v.size() - 1.0); };
  const double ratio = std::sqrt((var(t) + var(c)) / 2.0) / std::sqrt(var(t));
  EXPECT_NEAR(asmd_att(d, w, 0), asmd_ate(d, w, 0) * ratio, 1e-12);
}

TEST(Asmd, ZeroVariance) {
  const Dataset d = testing::make_dataset({1.0, 1.0}, {1.0, 1.0});
  try {
    asmd_ate(d, testing::uniform_weights(d), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroVariance);
  }
  EXPECT_THROW(asmd_att(d, testing::uniform_weights(d), 0), Error);
}

TEST(Asmd, Kdm1DrivesFirstMomentsToZero) {
  std::mt19937_64 gen(2);
  for (int r = 0; r < 10; ++r) {
    const Dataset d = testing::random_dataset(gen, 40, 3);
    const BalanceWeights w =
        solve_weights(d, {Target::kATE, MomentConstraints::kFirstMoment, 0.0}, median_bandwidth(d.x()));
    for (Index k = 0; k < d.dim(); ++k) EXPECT_LE(asmd_ate(d, w, k), 1e-6);
    const BalanceWeights a =
        solve_weights(d, {Target::kATT, MomentConstraints::kFirstMoment, 0.0}, median_bandwidth(d.x()));
    for (Index k = 0; k < d.dim(); ++k) EXPECT_LE(asmd_att(d, a, k), 1e-6);
  }
}

TEST(WeightedEcdf, StepFunction) {
  const WeightedEcdf single(WeightedSample::make(vec({2.0}), vec({1.0})));
  EXPECT_EQ(single(1.999), 0.0);
  EXPECT_EQ(single(2.0), 1.0);
  const WeightedEcdf two(WeightedSample::make(vec({1.0, 2.0}), vec({0.25, 0.75})));
  EXPECT_DOUBLE_EQ(two(1.5), 0.25);
  EXPECT_EQ(two(-1e300), 0.0);
  EXPECT_EQ(two(1e300), 1.0);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> u;
  const WeightedEcdf f(WeightedSample::make(Vector::NullaryExpr(30, [&] { return normal(gen); }),
                                            Vector::NullaryExpr(30, [&] { return u(gen); })));
  double last = 0.0;
  for (double x = -4.0; x <= 4.0; x += 0.01) {
    EXPECT_GE(f(x), last);
    last = f(x);
  }
}

TEST(WeightedSample, Validation) {
  EXPECT_THROW(WeightedSample::make(Vector(0), Vector(0)), Error);
  EXPECT_THROW(WeightedSample::make(vec({1, 2}), vec({1})), Error);
  EXPECT_THROW(WeightedSample::make(vec({1, 2}), vec({0, 0})), Error);
  EXPECT_THROW(WeightedSample::make(vec({1, 2}), vec({1, -0.5})), Error);
  const WeightedSample s = WeightedSample::make(vec({1, 2}), vec({2, 6}));
  EXPECT_DOUBLE_EQ(s.masses(1), 0.75);
}

TEST(Ks, HandExamples) {
  const WeightedSample a = WeightedSample::uniform(vec({0.0, 1.0}));
  const WeightedSample b = WeightedSample::uniform(vec({0.5}));
  EXPECT_DOUBLE_EQ(ks_stat(a, b), 0.5);
  EXPECT_DOUBLE_EQ(ks_stat(a, a), 0.0);
  EXPECT_DOUBLE_EQ(ks_stat(a, WeightedSample::uniform(vec({5.0, 6.0}))), 1.0);
}

TEST(Ks, MeanKsBounds) {
  const Dataset same = testing::make_dataset({0.0, 1.0, 2.0}, {0.0, 1.0, 2.0});
  EXPECT_EQ(mean_ks(same, testing::uniform_weights(same)), 0.0);
  const Dataset apart = testing::make_dataset({0.0, 1.0}, {3.0, 4.0});
  EXPECT_EQ(mean_ks(apart, testing::uniform_weights(apart)), 1.0);
  std::mt19937_64 gen(4);
  for (int r = 0; r < 20; ++r) {
    const Dataset d = testing::random_dataset(gen, 25, 3);
    const double ks = mean_ks(d, testing::uniform_weights(d));
    EXPECT_GE(ks, 0.0);
    EXPECT_LE(ks, 1.0);
  }
}

TEST(Ks, SupremumAttainedAtSamplePoints) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> normal;
  const WeightedSample a = WeightedSample::uniform(Vector::NullaryExpr(15, [&] { return normal(gen); }));
  const WeightedSample b = WeightedSample::uniform(Vector::NullaryExpr(12, [&] { return normal(gen) + 0.3; }));
  const WeightedEcdf fa(a), fb(b);
  double dense = 0.0;
  for (double x = -6.0; x <= 6.0; x += 1e-4) dense = std::max(dense, std::abs(fa(x) - fb(x)));
  EXPECT_NEAR(ks_stat(a, b), dense, 1e-12);
}

TEST(Welch, HandComputationAndAntisymmetry) {
  const WeightedSample t = WeightedSample::uniform(vec({0.0, 2.0}));
  const WeightedSample c = WeightedSample::uniform(vec({1.0, 3.0}));
  EXPECT_NEAR(welch_t(t, c), -1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(welch_t(c, t), 1.0 / std::sqrt(2.0), 1e-15);
  const Dataset d = testing::make_dataset({0.0, 2.0}, {1.0, 3.0});
  EXPECT_NEAR(mean_t(d, testing::uniform_weights(d)), -1.0 / std::sqrt(2.0), 1e-15);
  const Dataset bal = testing::make_dataset({0.0, 2.0}, {0.0, 2.0});
  EXPECT_EQ(mean_t(bal, testing::uniform_weights(bal)), 0.0);
  EXPECT_THROW(welch_t(WeightedSample::uniform(vec({1.0})), c), Error);
  EXPECT_THROW(welch_t(WeightedSample::uniform(vec({1.0, 1.0})), WeightedSample::uniform(vec({1.0, 1.0}))), Error);
}

TEST(EstimatorMetrics, HandExamples) {
  const std::vector<double> exact{20.0, 20.0, 20.0};
  const EstimateReport a = estimator_metrics("x", exact, 20.0);
  EXPECT_EQ(a.bias, 0.0);
  EXPECT_EQ(a.rmse, 0.0);
  const std::vector<double> pair{19.0, 21.0};
  const EstimateReport b = estimator_metrics("x", pair, 20.0);
  EXPECT_EQ(b.bias, 0.0);
  EXPECT_DOUBLE_EQ(b.rmse, 1.0);
  EXPECT_DOUBLE_EQ(b.sd, 1.0);
  EXPECT_EQ(b.pct_bias, 0.0);
  const std::vector<double> one{1.0};
  try {
    estimator_metrics("x", one, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTooFewEstimates);
  }
}

TEST(EstimatorMetrics, RmseDecomposition) {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> normal(3.0, 2.0);
  for (int r = 0; r < 20; ++r) {
    std::vector<double> e(37);
    for (double& v : e) v = normal(gen);
    const EstimateReport m = estimator_metrics("x", e, 2.5);
    const double n = static_cast<double>(e.size());
    const double var = m.sd * m.sd * n;  // sample variance
    EXPECT_NEAR(m.rmse * m.rmse, m.bias * m.bias + (n - 1.0) / n * var, 1e-10);
    EXPECT_GE(m.rmse, std::abs(m.bias) - 1e-12);
    EXPECT_NEAR(m.pct_bias, 100.0 * m.bias / std::sqrt(var), 1e-9);
  }
}

TEST(BalanceReport, ConsistentAndPure) {
  std::mt19937_64 gen(7);
  const Dataset d = testing::random_dataset(gen, 30, 4);
  const Bandwidth bw = median_bandwidth(d.x());
  const BalanceWeights w = solve_weights(d, {Target::kATE, MomentConstraints::kNone, 0.0}, bw);
  const BalanceReport a = balance_report(d, w, bw, Target::kATE);
  const BalanceReport b = balance_report(d, w, bw, Target::kATE);
  EXPECT_EQ(std::memcmp(&a.rw, &b.rw, sizeof(double)), 0);
  EXPECT_EQ(a.per_covariate_asmd, b.per_covariate_asmd);
  EXPECT_EQ(a.mean_ks, b.mean_ks);
  EXPECT_EQ(a.mean_t, b.mean_t);
  EXPECT_NEAR(a.kd * a.kd, a.rw, 1e-10);
  EXPECT_EQ(a.per_covariate_asmd.size(), 4U);
  std::vector<double> sorted = a.per_covariate_asmd;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_DOUBLE_EQ(a.med_asmd, 0.5 * (sorted[1] + sorted[2]));
  EXPECT_DOUBLE_EQ(a.max_asmd, sorted[3]);
}

TEST(BalanceReport, PerfectBalance) {
  const Dataset d = testing::make_dataset({0.0, 1.0, 3.0}, {0.0, 1.0, 3.0});
  const BalanceReport r = balance_report(d, testing::uniform_weights(d), Bandwidth(1.0), Target::kATE);
  EXPECT_NEAR(r.kd, 0.0, 1e-7);
  EXPECT_NEAR(r.max_asmd, 0.0, 1e-15);
}

TEST(BalanceReport, Kdm1BeatsUnadjustedOnMeanAsmd) {
  std::mt19937_64 gen(8);
  for (int r = 0; r < 50; ++r) {
    const Dataset d = testing::random_dataset(gen, 30, 3, 0.7);
    const Bandwidth bw = median_bandwidth(d.x());
    const BalanceWeights w = solve_weights(d, {Target::kATE, MomentConstraints::kFirstMoment, 0.0}, bw);
    EXPECT_LE(balance_report(d, w, bw, Target::kATE).mean_asmd,
              balance_report(d, testing::uniform_weights(d), bw, Target::kATE).mean_asmd);
  }
}

TEST(Density, PointMassAndUniform) {
  const Vector grid = Vector::LinSpaced(201, -2.0, 4.0);
  const Vector dens = weighted_density_series(WeightedSample::uniform(vec({1.0})), grid, 0.5);
  Index peak = 0;
  dens.maxCoeff(&peak);
  EXPECT_NEAR(grid(peak), 1.0, 1e-12);

  const Vector values = vec({0.0, 0.4, 1.5, 2.0});
  const Vector ours = weighted_density_series(WeightedSample::uniform(values), grid, 0.3);
  for (Index g = 0; g < grid.size(); ++g) {
    double kde = 0.0;
    for (Index i = 0; i < values.size(); ++i) {
      const double z = (grid(g) - values(i)) / 0.3;
      kde += std::exp(-0.5 * z * z) / (0.3 * std::sqrt(2.0 * M_PI));
    }
    EXPECT_NEAR(ours(g), kde / 4.0, 1e-14);
  }
  EXPECT_THROW(weighted_density_series(WeightedSample::uniform(vec({1.0})), grid, -1.0), Error);
}

TEST(Density, IntegratesToOne) {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> u;
  const WeightedSample s = WeightedSample::make(Vector::NullaryExpr(40, [&] { return normal(gen); }),
                                                Vector::NullaryExpr(40, [&] { return u(gen); }));
  const double h = silverman_bandwidth(s);
  const Vector grid = Vector::LinSpaced(2001, s.values.minCoeff() - 4 * h, s.values.maxCoeff() + 4 * h);
  const Vector dens = weighted_density_series(s, grid);
  double integral = 0.0;
  for (Index g = 1; g < grid.size(); ++g) integral += 0.5 * (dens(g) + dens(g - 1)) * (grid(g) - grid(g - 1));
  EXPECT_GE(integral, 0.99);
  EXPECT_LE(integral, 1.01);
}

TEST(SeriesWriters, Headers) {
  std::ostringstream a, b;
  write_density_series(a, vec({0.0, 1.0}), vec({0.1, 0.2}));
  EXPECT_EQ(a.str(), "x,density\n0,0.10000000000000001\n1,0.20000000000000001\n");
  write_ecdf_series(b, WeightedEcdf(WeightedSample::make(vec({1.0, 2.0}), vec({0.25, 0.75}))));
  EXPECT_EQ(b.str(), "x,F\n1,0.25\n2,1\n");
}

}  // namespace
}  // namespace kdb
