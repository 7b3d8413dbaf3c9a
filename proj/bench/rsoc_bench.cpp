// Copyright 2026 The rsoc Authors
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

// Serial reference vs OpenMP kernel on the monoped landing task.
//   rsoc_bench [--benchmark_filter=...]

#include <vector>

#include <benchmark/benchmark.h>

#include "rsoc/experiments.hpp"
#include "rsoc/parallel.hpp"

#ifndef RSOC_CONFIG_DIR
#define RSOC_CONFIG_DIR "configs"
#endif

namespace rsoc {
namespace {

ExperimentConfig BenchConfig() {
  ExperimentConfig c = LoadConfig(RSOC_CONFIG_DIR "/monoped_montecarlo.yaml");
  c.sim.sensor_noise = false;
  return c;
}

struct Fixture {
  ExperimentConfig config;
  Scenario scenario;
  SolverRun run;

  Fixture()
      : config(BenchConfig()),
        scenario(BuildScenario(config)),
        run(RunSolver(scenario, config, SolverMode::kNeutral)) {}

  std::vector<RolloutJob> Jobs(int n) const {
    std::vector<RolloutJob> jobs;
    for (int i = 0; i < n; ++i) {
      const std::uint64_t seed = RunSeed(config.batch.seed, i);
      jobs.push_back({&run.plan,
                      SampleTerrain(scenario.touchdown_x, config.terrain.block_width,
                                    0.045, seed),
                      seed});
    }
    return jobs;
  }
};

const Fixture& Shared() {
  static const Fixture f;
  return f;
}

void BM_LinearizeSerial(benchmark::State& state) {
  const Fixture& f = Shared();
  for (auto _ : state) {
    benchmark::DoNotOptimize(LinearizeTrajectory(
        *f.scenario.model, f.scenario.problem.schedule, f.run.result.nominal));
  }
}
BENCHMARK(BM_LinearizeSerial)->Unit(benchmark::kMicrosecond);

void BM_LinearizeParallel(benchmark::State& state) {
  const Fixture& f = Shared();
  SetNumThreads(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(LinearizeTrajectoryParallel(
        *f.scenario.model, f.scenario.problem.schedule, f.run.result.nominal));
  }
  SetNumThreads(0);
}
BENCHMARK(BM_LinearizeParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);

void BM_RolloutSerial(benchmark::State& state) {
  const Fixture& f = Shared();
  const auto jobs = f.Jobs(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(RolloutBatchSerial(*f.scenario.model, f.config.sim, jobs));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_RolloutSerial)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_RolloutParallel(benchmark::State& state) {
  const Fixture& f = Shared();
  const auto jobs = f.Jobs(16);
  SetNumThreads(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(RolloutBatch(*f.scenario.model, f.config.sim, jobs));
  }
  SetNumThreads(0);
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_RolloutParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace rsoc

BENCHMARK_MAIN();
