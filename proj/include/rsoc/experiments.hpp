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

#ifndef RSOC_EXPERIMENTS_HPP_
#define RSOC_EXPERIMENTS_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rsoc/dynamics.hpp"
#include "rsoc/estimator.hpp"
#include "rsoc/references.hpp"
#include "rsoc/simulator.hpp"
#include "rsoc/solver.hpp"

namespace rsoc {

// Bad or inconsistent configuration. line/column are 1-based, 0 when the
// error is not tied to a spot in a document.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& message, int line = 0, int column = 0);

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct ModelConfig {
  std::string type = "linear";  // linear | pendulum | monoped
  double dt = 0.01;
  MatrixXd A;  // linear, discrete time
  MatrixXd B;
  MatrixXd C;  // empty: identity
  PendulumParams pendulum;
  MonopedParams monoped;
};

struct TaskConfig {
  std::string type = "hold";  // hold | line | landing
  int horizon = 50;
  VectorXd x0;
  VectorXd target;
  // hold and line only; empty: no contacts over the whole horizon. When
  // set, the durations must add up to `horizon`.
  std::vector<std::pair<ContactSet, int>> schedule;
  LandingSpec landing;
};

// Diagonal weights.
struct CostConfig {
  VectorXd Q;
  VectorXd R;
  VectorXd Q_terminal;
  double switch_multiplier = 100.0;
};

struct SolverSettings {
  std::vector<SolverMode> modes = {SolverMode::kNeutral};
  double sigma = 10.0;  // used by the risk modes
  int max_iterations = 100;
  double tolerance = 1e-6;
};

// Diagonal covariances; gamma_c is per foot over (p, pdot).
struct NoiseConfig {
  VectorXd omega;
  VectorXd gamma_fs;
  VectorXd gamma_c;
  double landing_fraction = 0.3;
  bool project_nullspace = true;
  VectorXd sensor;  // simulator sensor noise; empty: gamma_fs
};

// Fixed blocks for `run`; per-touchdown random blocks for `montecarlo`,
// centred on the planned foot position, one batch per max height.
struct TerrainConfig {
  std::vector<Block> blocks;
  std::vector<double> max_heights;
  double block_width = 0.1;
};

struct BatchConfig {
  int runs = 1;
  std::uint64_t seed = 1;
};

struct ExperimentConfig {
  std::string name = "experiment";
  ModelConfig model;
  TaskConfig task;
  CostConfig cost;
  SolverSettings solver;
  NoiseConfig noise;
  SimConfig sim;
  TerrainConfig terrain;
  SuccessCriteria success;
  BatchConfig batch;
  std::string output = "out";

  // Dimension and range checks. Throws ConfigError.
  void Validate() const;
};

// Parses and validates a YAML document. Errors carry the line and column
// of the offending node; `source` prefixes the message.
ExperimentConfig ParseConfig(const std::string& text,
                             const std::string& source = "<config>");
ExperimentConfig LoadConfig(const std::string& path);
// Canonical YAML; ParseConfig(SaveConfig(c)) reproduces c.
std::string SaveConfig(const ExperimentConfig& config);

// SHA-256 of `text` as lowercase hex.
std::string Sha256Hex(const std::string& text);

// Model, problem and reference built from a config. `problem.model`
// points into `model`.
struct Scenario {
  std::unique_ptr<Model> model;
  Problem problem;
  Reference reference;
  State target;
  // Planned foot x at each touchdown, in time order.
  std::vector<double> touchdown_x;
};

Scenario BuildScenario(const ExperimentConfig& config);

struct SolverRun {
  SolverMode mode = SolverMode::kNeutral;
  SolveResult result;
  ClosedLoopPlan plan;
  double wall_time = 0.0;
};

SolverRun RunSolver(const Scenario& scenario, const ExperimentConfig& config,
                    SolverMode mode);

// One row per (solver, seed). Wall times are kept out of it so that the
// table is reproducible byte for byte; they go to timing.csv.
struct RunSummary {
  std::string solver;
  std::uint64_t seed = 0;
  double max_height = 0.0;
  std::string terrain_hash;
  bool success = false;
  bool diverged = false;
  double peak_force = 0.0;
  double terminal_position_error = 0.0;
  double terminal_velocity_error = 0.0;
  double peak_kp_norm = 0.0;
  double peak_kd_norm = 0.0;
  int iterations = 0;
  std::string status;
};

RunSummary Summarize(const Scenario& scenario, const ExperimentConfig& config,
                     const SolverRun& run, const Trace& trace,
                     std::uint64_t seed, double max_height,
                     const Terrain& terrain);

void WriteSummaryCsv(std::ostream& out, const std::vector<RunSummary>& rows);

// Seed of run `index` in a batch with master seed `master`.
std::uint64_t RunSeed(std::uint64_t master, int index);

// Blocks of width `width` centred on each planned touchdown, heights
// uniform in [0, max_height] drawn from `seed`.
Terrain SampleTerrain(const std::vector<double>& touchdown_x, double width,
                      double max_height, std::uint64_t seed);

// Stable short hash of a terrain, for checking paired sampling.
std::string TerrainHash(const Terrain& terrain);

// One-sided sign test: probability of at least `wins` successes in
// wins + losses fair coin flips. 1 when there are no discordant pairs.
double SignTestPValue(int wins, int losses);

struct RunOptions {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<SolverMode> solver;
  int jobs = 0;  // <= 0: OpenMP default
};

// Applies command-line overrides to a config.
ExperimentConfig ApplyOverrides(ExperimentConfig config,
                                const RunOptions& options);

struct SolverAggregate {
  double max_height = 0.0;
  std::string solver;
  int runs = 0;
  int successes = 0;
  // Against the baseline solver (ddp when configured, else the first);
  // empty for the baseline itself.
  std::optional<int> wins;
  std::optional<int> losses;
  std::optional<double> p_value;

  double success_percent() const {
    return runs ? 100.0 * successes / runs : 0.0;
  }
};

struct ExperimentResult {
  std::vector<RunSummary> rows;
  std::vector<SolverAggregate> aggregate;  // montecarlo only
  std::vector<std::string> files;          // relative to the output dir
  bool no_progress = false;

  // 0 on completion, 3 when any solve made no progress.
  int ExitCode() const { return no_progress ? 3 : 0; }
};

// Every configured solver, every seed of the batch, on the fixed terrain.
// Writes traces/, metrics/, summary.csv, timing.csv and manifest.yaml.
ExperimentResult RunExperiment(const ExperimentConfig& config,
                               const RunOptions& options = {});

// Paired Monte Carlo over sampled terrains: each solver is solved once and
// rolled out on the same terrain per seed. Writes summary.csv,
// montecarlo.csv, timing.csv, metrics/ and manifest.yaml.
ExperimentResult RunMonteCarlo(const ExperimentConfig& config,
                               const RunOptions& options = {});

}  // namespace rsoc

#endif  // RSOC_EXPERIMENTS_HPP_
