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

#ifndef RSOC_ESTIMATOR_HPP_
#define RSOC_ESTIMATOR_HPP_

#include <vector>

#include <Eigen/Dense>

#include "rsoc/contact.hpp"
#include "rsoc/dynamics.hpp"
#include "rsoc/statespace.hpp"

namespace rsoc {

// Process noise Omega, full-state measurement noise Gamma_fs, and the
// swing-foot contact uncertainty Gamma_c (4x4 per foot over (p, pdot)),
// which is switched on in the final `landing_fraction` of each swing.
struct NoiseModel {
  MatrixXd omega;
  MatrixXd gamma_fs;
  MatrixXd gamma_c;
  double landing_fraction = 0.3;
  bool project_nullspace = true;
};

// G = A Sigma F' (F Sigma F' + D Gamma D')^-1. Throws NumericalError if the
// innovation covariance is singular.
MatrixXd KalmanGain(const MatrixXd& A, const MatrixXd& sigma,
                    const MatrixXd& F, const MatrixXd& D,
                    const MatrixXd& gamma);

// (A - G F) Sigma (A - G F)' + C Omega C' + G D Gamma D' G', symmetrized.
MatrixXd PropagateErrorCov(const MatrixXd& A, const MatrixXd& G,
                           const MatrixXd& F, const MatrixXd& C,
                           const MatrixXd& omega, const MatrixXd& D,
                           const MatrixXd& gamma, const MatrixXd& sigma);

// Gains G_t (t < N) and covariances Sigma_t (t <= N) along a nominal.
struct FilterPass {
  std::vector<MatrixXd> G;
  std::vector<MatrixXd> sigma;
  std::vector<MatrixXd> gamma;  // measurement covariance used at each step
};

// Sequential pass over precomputed linearizations and per-step Gamma_t.
FilterPass RunFilterPass(const std::vector<LinearStep>& steps,
                         const std::vector<MatrixXd>& gammas,
                         const MatrixXd& omega, const MatrixXd& sigma0);

// Measurement covariance at step t: Gamma_fs plus the projected contact
// uncertainty of every foot that is in its landing window.
MatrixXd StepMeasurementCovariance(const Model& model,
                                   const PhaseSchedule& schedule,
                                   const NoiseModel& noise, const State& x,
                                   int t);

// Linearizes along the nominal and runs the filter with Sigma_0 = sigma0
// (Gamma_fs when empty).
FilterPass RunFilterPass(const Model& model, const PhaseSchedule& schedule,
                         const std::vector<State>& xs,
                         const std::vector<VectorXd>& us,
                         const NoiseModel& noise,
                         const MatrixXd& sigma0 = MatrixXd());

// Plant and estimator deviations stacked as [dx; dxhat]:
//   A~ = [[A, 0], [G F, A - G F]], B~ = [B; B], C~ = blockdiag(C, G D),
//   noise covariance blockdiag(Omega, Gamma).
struct AugmentedStep {
  MatrixXd A;
  MatrixXd B;
  MatrixXd C;
  MatrixXd W;
};

AugmentedStep BuildAugmented(const LinearStep& step, const MatrixXd& G,
                             const MatrixXd& omega, const MatrixXd& gamma);

}  // namespace rsoc

#endif  // RSOC_ESTIMATOR_HPP_
