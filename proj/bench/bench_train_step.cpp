// Serial reference step vs. the OpenMP step on the default world.
#include <benchmark/benchmark.h>

#include <memory>

#include "tspo/environment.hpp"
#include "tspo/trainer.hpp"

namespace {

std::shared_ptr<const tspo::World> default_world() {
  static auto world = std::make_shared<const tspo::World>(tspo::build_world(tspo::WorldConfig{}));
  return world;
}

void run_steps(benchmark::State& state, tspo::ExecutionMode mode) {
  tspo::TrainConfig cfg;
  cfg.batch_questions = static_cast<std::size_t>(state.range(0));
  cfg.inner_epochs = static_cast<std::size_t>(state.range(1));
  tspo::Trainer trainer(default_world(), cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(trainer.step(mode));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_TrainStepSerial(benchmark::State& state) { run_steps(state, tspo::ExecutionMode::Serial); }
void BM_TrainStepParallel(benchmark::State& state) { run_steps(state, tspo::ExecutionMode::Parallel); }

}  // namespace

BENCHMARK(BM_TrainStepSerial)->Args({8, 1})->Args({64, 1})->Args({64, 4});
BENCHMARK(BM_TrainStepParallel)->Args({8, 1})->Args({64, 1})->Args({64, 4});

BENCHMARK_MAIN();
