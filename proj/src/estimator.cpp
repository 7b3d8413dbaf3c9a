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

#include "rsoc/estimator.hpp"

#include <string>

#include "rsoc/errors.hpp"

namespace rsoc {

MatrixXd KalmanGain(const MatrixXd& A, const MatrixXd& sigma,
                    const MatrixXd& F, const MatrixXd& D,
                    const MatrixXd& gamma) {
  if (A.cols() != sigma.rows() || F.cols() != sigma.rows() ||
      D.rows() != F.rows() || D.cols() != gamma.rows()) {
    throw ContractViolation("KalmanGain: dimension mismatch");
  }
  const MatrixXd innovation =
      Symmetrize(F * sigma * F.transpose() + D * gamma * D.transpose());
  Eigen::LDLT<MatrixXd> ldlt(innovation);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.rcond() < 1e-15) {
    throw NumericalError("KalmanGain: innovation covariance is singular");
  }
  // G = A Sigma F' S^-1  <=>  G' = S^-1 F Sigma' A'.
  return ldlt.solve(F * sigma.transpose() * A.transpose()).transpose();
}

MatrixXd PropagateErrorCov(const MatrixXd& A, const MatrixXd& G,
                           const MatrixXd& F, const MatrixXd& C,
                           const MatrixXd& omega, const MatrixXd& D,
                           const MatrixXd& gamma, const MatrixXd& sigma) {
  const MatrixXd closed = A - G * F;
  const MatrixXd GD = G * D;
  return Symmetrize(closed * sigma * closed.transpose() +
                    C * omega * C.transpose() + GD * gamma * GD.transpose());
}

FilterPass RunFilterPass(const std::vector<LinearStep>& steps,
                         const std::vector<MatrixXd>& gammas,
                         const MatrixXd& omega, const MatrixXd& sigma0) {
  if (steps.size() != gammas.size()) {
    throw ContractViolation("RunFilterPass: one Gamma per step required");
  }
  FilterPass pass;
  pass.sigma.reserve(steps.size() + 1);
  pass.G.reserve(steps.size());
  pass.sigma.push_back(ClipToPsd(Symmetrize(sigma0)));
  for (std::size_t t = 0; t < steps.size(); ++t) {
    const LinearStep& s = steps[t];
    const MatrixXd& sigma = pass.sigma.back();
    MatrixXd G = KalmanGain(s.A, sigma, s.F, s.D, gammas[t]);
    pass.sigma.push_back(ClipToPsd(
        PropagateErrorCov(s.A, G, s.F, s.C, omega, s.D, gammas[t], sigma)));
    pass.G.push_back(std::move(G));
  }
  pass.gamma = gammas;
  return pass;
}

MatrixXd StepMeasurementCovariance(const Model& model,
                                   const PhaseSchedule& schedule,
                                   const NoiseModel& noise, const State& x,
                                   int t) {
  const ActivePhase phase = schedule.Active(t);
  std::vector<FootKinematics> landing, active;
  for (int f : phase.swing) {
    if (schedule.InLandingWindow(f, t, noise.landing_fraction)) {
      landing.push_back(model.Foot(x, f));
    }
  }
  if (landing.empty() || noise.gamma_c.size() == 0) return noise.gamma_fs;
  for (int f : phase.contacts) active.push_back(model.Foot(x, f));

  MatrixXd gamma_c = MatrixXd::Zero(4 * landing.size(), 4 * landing.size());
  for (std::size_t i = 0; i < landing.size(); ++i) {
    gamma_c.block(4 * i, 4 * i, 4, 4) = noise.gamma_c;
  }
  const SwingMap swing = MakeSwingMap(landing, active, model.state_dim());
  return ProjectContactCovariance(noise.gamma_fs, gamma_c, swing,
                                  noise.project_nullspace);
}

FilterPass RunFilterPass(const Model& model, const PhaseSchedule& schedule,
                         const std::vector<State>& xs,
                         const std::vector<VectorXd>& us,
                         const NoiseModel& noise, const MatrixXd& sigma0) {
  const int N = schedule.horizon();
  if (static_cast<int>(us.size()) != N ||
      static_cast<int>(xs.size()) != N + 1) {
    throw ContractViolation("RunFilterPass: nominal does not cover horizon");
  }
  std::vector<LinearStep> steps;
  std::vector<MatrixXd> gammas;
  steps.reserve(N);
  gammas.reserve(N);
  for (int t = 0; t < N; ++t) {
    steps.push_back(
        Linearize(model, xs[t], us[t], schedule.Contacts(t), schedule.PhaseIndex(t)));
    gammas.push_back(StepMeasurementCovariance(model, schedule, noise, xs[t], t));
  }
  return RunFilterPass(steps, gammas, noise.omega,
                       sigma0.size() ? sigma0 : noise.gamma_fs);
}

AugmentedStep BuildAugmented(const LinearStep& step, const MatrixXd& G,
                             const MatrixXd& omega, const MatrixXd& gamma) {
  const Eigen::Index n = step.A.rows();
  if (G.rows() != n || G.cols() != step.F.rows() ||
      omega.rows() != step.C.cols() || gamma.rows() != step.D.cols()) {
    throw ContractViolation("BuildAugmented: dimension mismatch");
  }
  const MatrixXd GF = G * step.F;
  AugmentedStep out;
  out.A = MatrixXd::Zero(2 * n, 2 * n);
  out.A.topLeftCorner(n, n) = step.A;
  out.A.bottomLeftCorner(n, n) = GF;
  out.A.bottomRightCorner(n, n) = step.A - GF;
  out.B.resize(2 * n, step.B.cols());
  out.B << step.B, step.B;
  out.C = BlockDiagonal(step.C, G * step.D);
  out.W = BlockDiagonal(omega, gamma);
  return out;
}

}  // namespace rsoc
