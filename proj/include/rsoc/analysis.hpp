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

#ifndef RSOC_ANALYSIS_HPP_
#define RSOC_ANALYSIS_HPP_

#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rsoc/chain.hpp"
#include "rsoc/simulator.hpp"
#include "rsoc/solver.hpp"
#include "rsoc/statespace.hpp"

namespace rsoc {

// Reported stiffness/damping ratio when the damping block vanishes.
inline constexpr double kInfiniteRatio =
    std::numeric_limits<double>::infinity();

// K = [Kp | Kd] over the configuration and velocity halves of the tangent.
struct GainDecomposition {
  MatrixXd Kp;
  MatrixXd Kd;
  double kp_norm = 0.0;  // Frobenius
  double kd_norm = 0.0;
  double ratio = 0.0;  // kp_norm / kd_norm, kInfiniteRatio if kd_norm == 0
};

// Throws ContractViolation for an odd tangent dimension or a column count
// that differs from it.
GainDecomposition SplitGains(const MatrixXd& K, const StateSpace& space);

// SplitGains when the tangent splits evenly; otherwise the whole gain is
// reported as Kp and Kd is empty.
GainDecomposition SplitGainsOrWhole(const MatrixXd& K, const StateSpace& space);

double FrobeniusNorm(const MatrixXd& M);

struct GainSchedule {
  std::vector<double> kp_norm;
  std::vector<double> kd_norm;
  std::vector<double> ratio;
};
// Uses SplitGainsOrWhole.
GainSchedule GainNorms(const Policy& policy, const StateSpace& space);

// Task-space stiffness and damping seen at the foot:
//   Lambda = (J M^-1 J')^-1,  Kp_ee = Lambda J M^-1 S' Kq J^+,
// and the same for Kd_ee with Kdq. Joint displacements in the null space of
// J also produce foot forces through Kq; that part is not represented.
struct EndEffectorImpedance {
  MatrixXd Kp;
  MatrixXd Kd;
  MatrixXd Lambda;
};

// Throws SingularConfiguration when J is rank deficient.
EndEffectorImpedance EeImpedance(const MatrixXd& M, const MatrixXd& J,
                                 const MatrixXd& S, const MatrixXd& Kq,
                                 const MatrixXd& Kdq);
EndEffectorImpedance EeImpedance(const PlanarChain& chain, const VectorXd& q,
                                 const VectorXd& v, const MatrixXd& Kq,
                                 const MatrixXd& Kdq);

// Per-row tracking and gain metrics of a closed-loop trace against its plan.
struct MetricTable {
  std::vector<double> time;
  std::vector<double> dq_norm;
  std::vector<double> dv_norm;
  std::vector<VectorXd> force_normal;
  std::vector<double> kp_norm;
  std::vector<double> kd_norm;
  std::vector<double> ratio;

  double peak_force = 0.0;
  int peak_index = -1;
  int peak_foot = -1;
  double terminal_position_error = 0.0;
  double terminal_velocity_error = 0.0;

  static std::vector<std::string> Columns(int num_feet);
  void WriteCsv(std::ostream& out) const;
};

MetricTable Metrics(const Trace& trace, const StateSpace& space,
                    const ClosedLoopPlan& plan);

// Index of the largest entry of `series` (first on ties), -1 if empty.
int PeakIndex(const std::vector<double>& series);

}  // namespace rsoc

#endif  // RSOC_ANALYSIS_HPP_
