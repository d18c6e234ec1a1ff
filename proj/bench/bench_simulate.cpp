#include <benchmark/benchmark.h>

#include "bridgestop/gamma_solver.hpp"
#include "bridgestop/simulate.hpp"

using namespace bridgestop;

namespace {

simulate::SimConfig config(std::int64_t paths, int threads) {
  simulate::SimConfig cfg;
  cfg.n_paths = paths;
  cfg.dt = 1e-4;
  cfg.seed = 7;
  cfg.prior = Prior::gamma_half(1, 0.5);
  cfg.threads = threads;
  return cfg;
}

const auto kRule = simulate::StoppingRule::constant(gamma_solver::solve_gamma(0.5).b);

void BM_SerialReference(benchmark::State& state) {
  const auto cfg = config(state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(simulate::serial::estimate_value(cfg, kRule));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_OpenMP(benchmark::State& state) {
  const auto cfg = config(state.range(0), static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(simulate::estimate_value(cfg, kRule));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_SerialReference)->Arg(20000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OpenMP)->Args({20000, 1})->Args({20000, 2})->Args({20000, 4})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
