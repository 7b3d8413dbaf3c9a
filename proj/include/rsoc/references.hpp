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

#ifndef RSOC_REFERENCES_HPP_
#define RSOC_REFERENCES_HPP_

#include <vector>

#include <Eigen/Dense>

#include "rsoc/contact.hpp"
#include "rsoc/dynamics.hpp"

namespace rsoc {

// Cost references plus a seed for the solver. x has N+1 entries, u and
// K_seed N (K_seed may be empty).
struct Reference {
  PhaseSchedule schedule;
  std::vector<State> x;
  std::vector<VectorXd> u;
  std::vector<MatrixXd> K_seed;
  State x0;
};

// Start at x0, track `target` with zero control for `horizon` steps.
Reference HoldReference(const Model& model, const State& x0,
                        const State& target, int horizon);

// Straight line from x0 to target on the state chart, zero control.
Reference LineReference(const Model& model, const State& x0,
                        const State& target, int horizon);

// Monoped dropping from rest onto a foot spot at x = 0 and settling:
//   flight:  the centre of mass falls ballistically for flight_time; the
//            foot follows a smoothstep and arrives with zero velocity,
//   stance:  the base dips by v t exp(-t / settle_time) and recovers.
// Joint references come from inverse kinematics, controls from inverse
// dynamics (flight: actuated rows; stance: torques and contact force).
struct LandingSpec {
  double stand_height = 0.26;
  double flight_time = 0.15;
  double stance_time = 0.25;
  double settle_time = 0.06;
  double knee_sign = -1.0;
  // Joint PD used to stabilize the seed rollout.
  double seed_kp = 0.5;
  double seed_kd = 0.02;

  void Validate(const ChainModel& model) const;
};

Reference LandingReference(const ChainModel& model, const LandingSpec& spec);

}  // namespace rsoc

#endif  // RSOC_REFERENCES_HPP_
