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

// rsoc run|montecarlo|validate <config> [--out DIR] [--seed N] [--jobs N]
//      [--solver ddp|risk|risk-meas]
//
// Exit codes: 0 done, 1 internal error, 2 invalid config or arguments,
// 3 a solve made no progress.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rsoc/experiments.hpp"

namespace {

void PrintAggregate(const rsoc::ExperimentResult& result) {
  std::printf("%-10s %-10s %6s %9s %8s\n", "max_height", "solver", "runs",
              "success%", "p");
  for (const rsoc::SolverAggregate& a : result.aggregate) {
    std::printf("%-10.4g %-10s %6d %9.1f ", a.max_height, a.solver.c_str(),
                a.runs, a.success_percent());
    if (a.p_value) {
      std::printf("%8.3g\n", *a.p_value);
    } else {
      std::printf("%8s\n", "-");
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-sensitive trajectory optimization experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int jobs = 0;
  std::string solver;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "Experiment config (YAML)")
        ->required();
  };
  auto add_run_flags = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir, "Output directory");
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--jobs", jobs, "Worker threads")->check(CLI::NonNegativeNumber);
    cmd->add_option("--solver", solver, "Run a single solver")
        ->check(CLI::IsMember({"ddp", "risk", "risk-meas"}));
  };

  CLI::App* run = app.add_subcommand("run", "Solve, simulate and report");
  add_common(run);
  add_run_flags(run);
  CLI::App* mc = app.add_subcommand("montecarlo", "Paired rollouts on sampled terrain");
  add_common(mc);
  add_run_flags(mc);
  CLI::App* validate = app.add_subcommand("validate", "Check a config and exit");
  add_common(validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const rsoc::ExperimentConfig config = rsoc::LoadConfig(config_path);
    if (validate->parsed()) {
      std::cout << config_path << ": ok\n";
      return 0;
    }
    rsoc::RunOptions options;
    if (!out_dir.empty()) options.out_dir = out_dir;
    if (run->count("--seed") + mc->count("--seed") > 0) options.seed = seed;
    if (!solver.empty()) options.solver = rsoc::ParseSolverMode(solver);
    options.jobs = jobs;

    const rsoc::ExperimentResult result = mc->parsed()
                                              ? rsoc::RunMonteCarlo(config, options)
                                              : rsoc::RunExperiment(config, options);
    const std::string dir = rsoc::ApplyOverrides(config, options).output;
    int ok = 0;
    for (const rsoc::RunSummary& row : result.rows) ok += row.success;
    std::cout << result.rows.size() << " runs, " << ok << " successful; "
              << result.files.size() << " files in " << dir << "\n";
    if (mc->parsed()) PrintAggregate(result);
    if (result.no_progress) {
      std::cerr << "warning: a solve stopped without progress\n";
    }
    return result.ExitCode();
  } catch (const rsoc::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
