// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include "fdiab/allocation.hpp"
#include "fdiab/montecarlo.hpp"

using namespace fdiab;

namespace {

SystemConfig scenario(int k_gnb, int k_iab) {
  SystemConfig cfg;
  cfg.k_gnb = k_gnb;
  cfg.k_iab = k_iab;
  return cfg;
}

void BM_ChannelDraw(benchmark::State& state) {
  const auto cfg = scenario(12, static_cast<int>(state.range(0)));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    RandomStream rng(seed++);
    const auto topo = generate_topology(cfg, rng);
    benchmark::DoNotOptimize(build_channel_set(topo, cfg, rng));
  }
}
BENCHMARK(BM_ChannelDraw)->Arg(1)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_GainReduction(benchmark::State& state) {
  const auto cfg = scenario(12, static_cast<int>(state.range(0)));
  RandomStream rng(1);
  const auto channels = build_channel_set(generate_topology(cfg, rng), cfg, rng);
  for (auto _ : state) benchmark::DoNotOptimize(reduce_channels(channels, cfg.noise_powers()));
}
BENCHMARK(BM_GainReduction)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_SolveAllocation(benchmark::State& state) {
  const auto strategy = state.range(0) == 0 ? Strategy::max_min : Strategy::max_sum;
  const auto cfg = scenario(static_cast<int>(state.range(1)), static_cast<int>(state.range(2)));
  const auto gains = trial_gains(cfg, 0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_allocation(strategy, gains, cfg));
  state.SetLabel(std::string(to_string(strategy)));
}
BENCHMARK(BM_SolveAllocation)
    ->Args({0, 4, 2})
    ->Args({1, 4, 2})
    ->Args({0, 12, 4})
    ->Args({1, 12, 4})
    ->Unit(benchmark::kMillisecond);

void BM_Trial(benchmark::State& state) {
  const auto cfg = scenario(12, static_cast<int>(state.range(0)));
  int trial = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(run_trial(cfg, trial++, {Strategy::uniform, Strategy::max_min, Strategy::max_sum}));
}
BENCHMARK(BM_Trial)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
