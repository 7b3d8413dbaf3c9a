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

#ifndef RSOC_SOLVER_HPP_
#define RSOC_SOLVER_HPP_

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsoc/contact.hpp"
#include "rsoc/cost.hpp"
#include "rsoc/dynamics.hpp"
#include "rsoc/estimator.hpp"

namespace rsoc {

enum class SolverMode { kNeutral, kRiskProcess, kRiskMeasurement };

// "ddp", "risk", "risk-meas".
std::string SolverModeName(SolverMode mode);
// Throws ContractViolation for unknown names.
SolverMode ParseSolverMode(const std::string& name);

// psi(dx) = 0.5 dx'S dx + s'dx + s_bar, with V = exp(sigma psi).
struct ValueQuadratic {
  MatrixXd S;
  VectorXd s;
  double s_bar = 0.0;
};

// E[V(m + C w)] = exp(sigma (0.5 m'M m + m_vec'm + c_bar)), w ~ N(0, Omega).
struct RiskExpectation {
  MatrixXd M;
  VectorXd m_vec;
  double c_bar = 0.0;
};

// Gaussian expectation of the exponential value. sigma == 0 takes the exact
// risk-neutral branch. Throws NeuroticBreakdown(step, lambda_min) when
// Omega^-1 - sigma C'S C is not positive definite. Omega may be singular.
RiskExpectation RiskCompletion(const ValueQuadratic& next, const MatrixXd& C,
                               const MatrixXd& omega, double sigma,
                               int step = -1);

// (S^-1 - sigma C Omega C')^-1; requires S invertible. Cross-check of
// RiskCompletion's M.
MatrixXd RiskInflatedHessian(const MatrixXd& S, const MatrixXd& C,
                             const MatrixXd& omega, double sigma);

struct PolicyStep {
  VectorXd k;
  MatrixXd K;      // applied gain; K_cond in measurement mode
  MatrixXd Kx;     // measurement mode only
  MatrixXd Kxhat;  // measurement mode only
  int phase = 0;
};

struct Policy {
  std::vector<PolicyStep> steps;
};

struct BackwardOptions {
  double reg_floor = 0.0;
  double reg_max = 1e6;
  // false evaluates the nominal under the optimal feedback with k = 0; the
  // value then predicts the cost of the nominal itself.
  bool feedforward = true;
};

struct BackwardResult {
  Policy policy;
  std::vector<ValueQuadratic> value;  // N+1 entries
  // Expected change of cost for step alpha: alpha d1 + 0.5 alpha^2 d2.
  double d1 = 0.0;
  double d2 = 0.0;
  double reg = 0.0;

  double ExpectedImprovement(double alpha) const {
    return alpha * d1 + 0.5 * alpha * alpha * d2;
  }
};

// One noise channel per step for the risk modes: process noise C_t with
// covariance omega in kRiskProcess; the augmented C~, W~ in
// kRiskMeasurement (pass `augmented`).
BackwardResult BackwardPass(const std::vector<LinearStep>& steps,
                            const std::vector<QuadCost>& costs,
                            const QuadCost& terminal, double sigma,
                            SolverMode mode, const MatrixXd& omega,
                            const std::vector<AugmentedStep>* augmented =
                                nullptr,
                            const BackwardOptions& options = {});

struct Trajectory {
  std::vector<State> x;     // N+1
  std::vector<VectorXd> u;  // N
};

struct Problem {
  const Model* model = nullptr;
  PhaseSchedule schedule;
  CostSpec cost;
  NoiseModel noise;
  State x0;
  // Seed controls and optional seed states/gains: the initial nominal is
  // the rollout of u_seed + K_seed (x (-) x_seed).
  std::vector<VectorXd> u_seed;
  std::vector<State> x_seed;
  std::vector<MatrixXd> K_seed;
};

// Deterministic rollout of u_t = u_n + alpha k_t + K_t dx_t. In
// measurement mode dx_t is replaced by a noiseless replay of the filter
// (needs `filter` and `steps`). Returns false if the state diverged.
struct ForwardResult {
  Trajectory traj;
  double cost = 0.0;
  bool diverged = false;
};

ForwardResult ForwardPass(const Problem& problem, const Trajectory& nominal,
                          const Policy& policy, double alpha,
                          SolverMode mode = SolverMode::kNeutral,
                          const std::vector<LinearStep>* steps = nullptr,
                          const FilterPass* filter = nullptr);

// Rollout of the seed described in the problem.
Trajectory SeedRollout(const Problem& problem);

struct SolverConfig {
  SolverMode mode = SolverMode::kNeutral;
  double sigma = 0.0;
  int max_iterations = 100;
  double tolerance = 1e-6;
  std::vector<double> line_search = {1.0, 0.5, 0.25, 0.125, 0.0625,
                                     0.03125, 0.015625};
  double reg_floor = 0.0;
  int max_stalls = 3;

  void Validate() const;
};

enum class SolveStatus { kConverged, kMaxIterations, kNoProgress, kBreakdown };
std::string SolveStatusName(SolveStatus status);

struct IterationRecord {
  int iteration = 0;
  double cost = 0.0;
  double alpha = 0.0;  // 0 when no step was accepted
  double max_feedforward = 0.0;
  bool breakdown = false;
};

struct SolveResult {
  Trajectory nominal;
  Policy policy;  // feedback at the final nominal, feedforward zeroed
  std::optional<FilterPass> filter;
  std::vector<LinearStep> steps;
  std::vector<ValueQuadratic> value;
  std::vector<IterationRecord> log;
  SolveStatus status = SolveStatus::kMaxIterations;
  // Objective predicted for the returned policy: (1/sigma) log E[exp(sigma
  // L)] in the risk modes, the deterministic cost in neutral mode.
  double cost = 0.0;
  // Deterministic cost of the nominal.
  double nominal_cost = 0.0;
  std::string message;
};

// Outer iLQR loop. Steps are accepted when the deterministic rollout cost
// decreases. Neurotic breakdown ends the solve with status kBreakdown and the best
// trajectory so far.
SolveResult Solve(const Problem& problem, const SolverConfig& config);

// iteration,cost,alpha,max_feedforward,breakdown_flag
void WriteIterationLog(std::ostream& out,
                       const std::vector<IterationRecord>& log);

// Linearizations along a trajectory, serial reference implementation.
std::vector<LinearStep> LinearizeTrajectory(const Model& model,
                                            const PhaseSchedule& schedule,
                                            const Trajectory& traj);

}  // namespace rsoc

#endif  // RSOC_SOLVER_HPP_
