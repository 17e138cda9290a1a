// Copyright 2026 The causalkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "causalkit/estimators.hpp"
#include "causalkit/simulate.hpp"
#include "causalkit/variance.hpp"

using namespace causalkit;

namespace {

MonteCarloOptions cs1_options(int runs) {
  MonteCarloOptions o;
  o.runs = runs;
  o.n = 1000;
  o.methods = {"OR1", "PS1", "DR1"};
  return o;
}

void BM_MonteCarloSerial(benchmark::State& state) {
  const auto o = cs1_options(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_monte_carlo_serial(o));
}

void BM_MonteCarloParallel(benchmark::State& state) {
  const auto o = cs1_options(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_monte_carlo(o));
}

double dr_statistic(const ObservationalDataset& ds) {
  return ate_dr(ds, OrSpec::all_covariates(ds), estimate_propensity_binary(ds), 1.0, 0.0).point;
}

const ObservationalDataset& bootstrap_sample() {
  static const ObservationalDataset ds =
      std::get<ObservationalDataset>(generate(DgpSpec{}, 0).data);
  return ds;
}

void BM_BootstrapSerial(benchmark::State& state) {
  const auto& ds = bootstrap_sample();
  const int b = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_variance_serial(dr_statistic, ds, b, 1));
}

void BM_BootstrapParallel(benchmark::State& state) {
  const auto& ds = bootstrap_sample();
  const int b = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bootstrap_variance(dr_statistic, ds, b, 1));
}

}  // namespace

BENCHMARK(BM_MonteCarloSerial)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonteCarloParallel)->Arg(100)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BootstrapSerial)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BootstrapParallel)->Arg(200)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
