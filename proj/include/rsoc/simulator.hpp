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

#ifndef RSOC_SIMULATOR_HPP_
#define RSOC_SIMULATOR_HPP_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsoc/contact.hpp"
#include "rsoc/dynamics.hpp"
#include "rsoc/solver.hpp"

namespace rsoc {

struct SimConfig {
  double dt = 1e-4;
  double stiffness = 1e5;
  double damping = 3e2;
  double friction = 0.7;
  double control_period = 1e-3;
  // Sensor noise: measurements x (+) gamma, gamma ~ N(0, sensor_cov), fed
  // through an EKF whose process covariance per optimizer step is
  // process_cov.
  bool sensor_noise = false;
  MatrixXd sensor_cov;
  MatrixXd process_cov;

  void Validate() const;
};

struct Block {
  double x_start = 0.0;
  double x_end = 0.0;
  double height = 0.0;
};

// Piecewise-constant ground height, zero outside the blocks.
class Terrain {
 public:
  Terrain() = default;
  // Throws ContractViolation on empty or overlapping intervals.
  explicit Terrain(std::vector<Block> blocks);

  double HeightAt(double x) const;
  const std::vector<Block>& blocks() const { return blocks_; }
  // Stable text fingerprint, used to check paired sampling.
  std::string Fingerprint() const;

 private:
  std::vector<Block> blocks_;
};

// Spring-damper ground reaction on a point foot. Normal force
// max(0, k depth - b pdot_z); tangential -b pdot_x clamped to mu * normal.
Eigen::Vector2d ContactForce(const Eigen::Vector2d& p,
                             const Eigen::Vector2d& pdot,
                             const Terrain& terrain, const SimConfig& sim);

// What the controller executes: nominal and gains on the optimizer grid.
struct ClosedLoopPlan {
  Trajectory nominal;
  Policy policy;
  PhaseSchedule schedule;
  double dt = 0.01;
};

// One row per control tick, plus a final row at the end of the horizon.
// force_normal holds the peak normal force per foot during the tick.
struct Trace {
  std::vector<double> time;
  std::vector<State> x;
  std::vector<VectorXd> u;
  std::vector<VectorXd> force_normal;
  // Frobenius norms of the applied gain blocks; with an odd tangent
  // dimension kp_norm is the norm of the whole gain and kd_norm is 0.
  std::vector<double> kp_norm;
  std::vector<double> kd_norm;
  bool diverged = false;

  int rows() const { return static_cast<int>(time.size()); }
  // time,x0..,u0..,fn0..,kp_norm,kd_norm
  void WriteCsv(std::ostream& out) const;
};

// Plan values at time `t`, linearly interpolated between optimizer knots
// (states on the manifold, controls and gains entry-wise).
struct PlanSample {
  State x;
  VectorXd u;
  VectorXd k;
  MatrixXd K;
};
PlanSample SamplePlan(const StateSpace& space, const ClosedLoopPlan& plan,
                      double t);

// Closed loop: plant at sim.dt (explicit Euler), controller at
// sim.control_period with zero-order hold. `seed` drives sensor noise.
Trace Rollout(const Model& model, const SimConfig& sim, const Terrain& terrain,
              const ClosedLoopPlan& plan, std::uint64_t seed);

struct SuccessCriteria {
  double position_tolerance = 0.05;
  double velocity_tolerance = 0.5;
  double fall_height = -1e9;
};

// Not diverged, terminal base position and velocity errors against `target`
// within tolerance (inclusive), base height never below fall_height.
bool Success(const Trace& trace, const BaseCoordinates& base,
             const State& target, const StateSpace& space,
             const SuccessCriteria& criteria);

// First row time >= `after` at which foot `foot` carries normal force;
// negative if none.
double FirstContactTime(const Trace& trace, int foot, double after);

}  // namespace rsoc

#endif  // RSOC_SIMULATOR_HPP_
