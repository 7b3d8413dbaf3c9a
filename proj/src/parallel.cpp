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

#include "rsoc/parallel.hpp"

#include <exception>

#include <omp.h>

namespace rsoc {
namespace {

int g_threads = 0;

int Threads() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

}  // namespace

void SetNumThreads(int threads) { g_threads = threads > 0 ? threads : 0; }

int NumThreads() { return Threads(); }

std::vector<LinearStep> LinearizeTrajectoryParallel(
    const Model& model, const PhaseSchedule& schedule, const Trajectory& traj) {
  const int N = schedule.horizon();
  std::vector<LinearStep> steps(N);
  std::exception_ptr error;
#pragma omp parallel for schedule(static) num_threads(Threads())
  for (int t = 0; t < N; ++t) {
    try {
      steps[t] = Linearize(model, traj.x[t], traj.u[t], schedule.Contacts(t),
                           schedule.PhaseIndex(t));
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return steps;
}

std::vector<Trace> RolloutBatchSerial(const Model& model, const SimConfig& sim,
                                      const std::vector<RolloutJob>& jobs) {
  std::vector<Trace> out;
  out.reserve(jobs.size());
  for (const RolloutJob& job : jobs) {
    out.push_back(Rollout(model, sim, job.terrain, *job.plan, job.seed));
  }
  return out;
}

std::vector<Trace> RolloutBatch(const Model& model, const SimConfig& sim,
                                const std::vector<RolloutJob>& jobs) {
  const int n = static_cast<int>(jobs.size());
  std::vector<Trace> out(n);
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1) num_threads(Threads())
  for (int i = 0; i < n; ++i) {
    try {
      out[i] = Rollout(model, sim, jobs[i].terrain, *jobs[i].plan, jobs[i].seed);
    } catch (...) {
#pragma omp critical
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

}  // namespace rsoc
