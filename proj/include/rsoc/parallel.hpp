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

#ifndef RSOC_PARALLEL_HPP_
#define RSOC_PARALLEL_HPP_

#include <cstdint>
#include <vector>

#include "rsoc/dynamics.hpp"
#include "rsoc/simulator.hpp"
#include "rsoc/solver.hpp"

namespace rsoc {

// OpenMP kernels. Each has a serial reference (LinearizeTrajectory,
// RolloutBatchSerial) and produces bit-identical results: every work item
// writes only its own slot and no reductions cross items.

// Number of worker threads used by the kernels; <= 0 restores the default.
void SetNumThreads(int threads);
int NumThreads();

std::vector<LinearStep> LinearizeTrajectoryParallel(
    const Model& model, const PhaseSchedule& schedule, const Trajectory& traj);

struct RolloutJob {
  const ClosedLoopPlan* plan = nullptr;
  Terrain terrain;
  std::uint64_t seed = 0;
};

std::vector<Trace> RolloutBatchSerial(const Model& model, const SimConfig& sim,
                                      const std::vector<RolloutJob>& jobs);
std::vector<Trace> RolloutBatch(const Model& model, const SimConfig& sim,
                                const std::vector<RolloutJob>& jobs);

}  // namespace rsoc

#endif  // RSOC_PARALLEL_HPP_
