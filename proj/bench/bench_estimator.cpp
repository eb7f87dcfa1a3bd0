// Copyright 2026 The nashvi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Serial reference estimator against the OpenMP kernel on the two-player
// example. Both produce bit-identical results; only wall time differs.

#include <benchmark/benchmark.h>

#include "nashvi/estimator.hpp"
#include "nashvi/game.hpp"
#include "nashvi/parallel.hpp"

namespace {

using namespace nashvi;

struct Setup {
  TabularGame game = two_player_example();
  ParamSpace space{{ParamKind::kTwoActionBox, 0.01}, 2, {2, 2}};
  PolicyParams params{space, {0.3, 0.6, 0.8, 0.4}};
};

const Setup& setup() {
  static const Setup s;
  return s;
}

void BM_Serial(benchmark::State& state) {
  const auto& s = setup();
  const int trajectories = static_cast<int>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    auto est = reference::gpomdp_estimate_serial(s.game, s.params, 20, trajectories, seed++);
    benchmark::DoNotOptimize(est.gradient.data());
  }
  state.SetItemsProcessed(state.iterations() * trajectories);
}

void BM_Parallel(benchmark::State& state) {
  const auto& s = setup();
  const int trajectories = static_cast<int>(state.range(0));
  std::uint64_t seed = 1;
  for (auto _ : state) {
    auto est = gpomdp_estimate(s.game, s.params, 20, trajectories, seed++);
    benchmark::DoNotOptimize(est.gradient.data());
  }
  state.SetItemsProcessed(state.iterations() * trajectories);
  state.counters["threads"] = parallel::effective_threads();
}

}  // namespace

BENCHMARK(BM_Serial)->RangeMultiplier(10)->Range(100, 10000)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Parallel)->RangeMultiplier(10)->Range(100, 10000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
