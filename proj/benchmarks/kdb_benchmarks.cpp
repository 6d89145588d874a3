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

#include <benchmark/benchmark.h>

#include <random>

#include "kdb/balancing.hpp"
#include "kdb/kernel.hpp"
#include "kdb/qp.hpp"
#include "kdb/simlab.hpp"

namespace {

kdb::Dataset study(kdb::Index n) {
  kdb::KangSchaferConfig cfg;
  cfg.n = n;
  cfg.seed = 42;
  return kdb::kang_schafer_generate(cfg).data;
}

void BM_MedianBandwidth(benchmark::State& state) {
  const kdb::Dataset d = study(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(kdb::median_bandwidth(d.x()));
}
BENCHMARK(BM_MedianBandwidth)->Arg(100)->Arg(200)->Arg(400);

void BM_InformationMatrix(benchmark::State& state) {
  const kdb::Dataset d = study(state.range(0));
  const kdb::Bandwidth bw = kdb::median_bandwidth(d.x());
  for (auto _ : state) benchmark::DoNotOptimize(kdb::information_matrix(d, bw));
}
BENCHMARK(BM_InformationMatrix)->Arg(100)->Arg(200)->Arg(400);

void BM_SolveKDM1(benchmark::State& state) {
  const kdb::Dataset d = study(state.range(0));
  const kdb::InformationMatrix base = kdb::information_matrix(d, kdb::median_bandwidth(d.x()));
  const kdb::BalanceScheme scheme{kdb::Target::kATE, kdb::MomentConstraints::kFirstMoment, 0.0};
  for (auto _ : state) benchmark::DoNotOptimize(kdb::solve_balance(d, scheme, base));
}
BENCHMARK(BM_SolveKDM1)->Arg(100)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_SolveRandomQp(benchmark::State& state) {
  const auto n = static_cast<kdb::Index>(state.range(0));
  std::mt19937_64 gen(7);
  std::normal_distribution<double> normal;
  const kdb::Matrix a = kdb::Matrix::NullaryExpr(n, n, [&] { return normal(gen); });
  const kdb::Vector c = kdb::Vector::NullaryExpr(n, [&] { return normal(gen); });
  const kdb::QuadraticProgram prob(a * a.transpose() + kdb::Matrix::Identity(n, n), c, kdb::Matrix::Ones(1, n),
                                   kdb::Vector::Ones(1), std::vector<bool>(static_cast<std::size_t>(n), true));
  for (auto _ : state) benchmark::DoNotOptimize(kdb::solve_qp(prob));
}
BENCHMARK(BM_SolveRandomQp)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
