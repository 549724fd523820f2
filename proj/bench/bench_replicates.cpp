#include <benchmark/benchmark.h>

#include "argsim/replicates.hpp"

namespace {

argsim::SimConfig bench_config() {
  argsim::SimConfig c;
  c.n_samples = 6;
  c.rho = 1.0;
  c.seed = 20240611;
  return c;
}

void BM_Replicates(benchmark::State& state, argsim::Engine engine) {
  argsim::RunOptions opts;
  opts.threads = static_cast<int>(state.range(0));
  const auto reps = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) {
    auto args = argsim::run_replicates(engine, bench_config(), reps, opts);
    benchmark::DoNotOptimize(args.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(1));
}

void thread_grid(benchmark::internal::Benchmark* b) {
  for (int threads : {1, 2, 4, 8}) b->Args({threads, 2000});
}

}  // namespace

BENCHMARK_CAPTURE(BM_Replicates, backintime, argsim::Engine::BackInTime)->Apply(thread_grid)->UseRealTime();
BENCHMARK_CAPTURE(BM_Replicates, spatial, argsim::Engine::Spatial)->Apply(thread_grid)->UseRealTime();

BENCHMARK_MAIN();
