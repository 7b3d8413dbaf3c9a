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

#ifndef RSOC_CONTACT_HPP_
#define RSOC_CONTACT_HPP_

#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rsoc/chain.hpp"
#include "rsoc/statespace.hpp"

namespace rsoc {

// Indices of feet, sorted ascending.
using ContactSet = std::vector<int>;

// Position, velocity and Jacobians of one point foot in the task plane.
struct FootKinematics {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
  MatrixXd J;
  MatrixXd Jdot;
};

// Rigid-contact force that enforces Jdot v + J vdot = 0:
//   lambda = Lambda (-Jdot v + J M^-1 h - J M^-1 tau_full),
//   Lambda = (J M^-1 J^T)^-1, tau_full = S^T tau.
// Scalar-generic; the double overload below adds the conditioning check.
template <typename T>
VecX<T> ResolveContactForcesT(const MatX<T>& M, const VecX<T>& h,
                              const MatX<T>& J, const MatX<T>& Jdot,
                              const VecX<T>& v, const VecX<T>& tau_full) {
  if (J.rows() == 0) return VecX<T>(0);
  Eigen::LLT<MatX<T>> llt(M);
  const MatX<T> minv_jt = llt.solve(J.transpose());
  const MatX<T> contact_inv = J * minv_jt;
  const VecX<T> rhs =
      -(Jdot * v) + minv_jt.transpose() * h - minv_jt.transpose() * tau_full;
  return contact_inv.llt().solve(rhs);
}

// Throws SingularContact (tagged with `phase`) when the condition number of
// J M^-1 J^T exceeds 1e12.
VectorXd ResolveContactForces(const MatrixXd& M, const VectorXd& h,
                              const MatrixXd& J, const MatrixXd& Jdot,
                              const VectorXd& v, const VectorXd& tau_full,
                              int phase = -1);

// Moore-Penrose inverse. Closed form A^T (A A^T)^-1 for full row rank,
// otherwise SVD with singular values below 1e-10 sigma_max dropped.
MatrixXd Pseudoinverse(const MatrixXd& A);

// P = I - A^+ A. `dim` is the column count, needed when A has no rows.
MatrixXd NullspaceProjector(const MatrixXd& A, int dim);

// [[J, 0], [Jdot, J]]: maps (dq, dv) to (dp, dpdot).
MatrixXd EndEffectorMap(const MatrixXd& J, const MatrixXd& Jdot);

// Stacked end-effector maps of the swinging feet (A_s) and of the feet in
// contact (A_c). Both have tangent_dim columns; either may have zero rows.
struct SwingMap {
  MatrixXd A_s;
  MatrixXd A_c;
};

SwingMap MakeSwingMap(std::span<const FootKinematics> swing,
                      std::span<const FootKinematics> active,
                      int tangent_dim);

// Gamma_fs + P_c A_s^+ Gamma_c A_s^+T P_c^T. Without `project_nullspace` the
// projector is skipped (swing uncertainty may leak into contact feet).
// Throws ContractViolation if either input covariance is not PSD.
MatrixXd ProjectContactCovariance(const MatrixXd& gamma_fs,
                                  const MatrixXd& gamma_c,
                                  const SwingMap& swing,
                                  bool project_nullspace = true);

struct Phase {
  ContactSet contacts;
  int start = 0;  // first step, inclusive
  int end = 0;    // exclusive
};

struct ActivePhase {
  int id = 0;
  ContactSet contacts;
  ContactSet swing;
};

// Contact sequence over a fixed horizon. The first step of each phase
// already uses that phase's contact set.
class PhaseSchedule {
 public:
  PhaseSchedule() = default;
  // (contacts, duration_steps) per phase, in order.
  PhaseSchedule(int num_feet,
                const std::vector<std::pair<ContactSet, int>>& phases);

  static PhaseSchedule Single(int num_feet, ContactSet contacts, int horizon);

  int horizon() const { return horizon_; }
  int num_feet() const { return num_feet_; }
  const std::vector<Phase>& phases() const { return phases_; }

  // Throws ContractViolation for t outside [0, horizon).
  ActivePhase Active(int t) const;
  const ContactSet& Contacts(int t) const;
  int PhaseIndex(int t) const;

  // First step of any phase after the first.
  bool IsSwitchStep(int t) const;

  // Foot `foot` is airborne at t and t lies in the final `fraction` of a
  // swing interval that ends in a touchdown before the horizon.
  bool InLandingWindow(int foot, int t, double fraction) const;

  // Steps at which `foot` touches down (swing -> contact transitions).
  std::vector<int> Touchdowns(int foot) const;

 private:
  int num_feet_ = 0;
  int horizon_ = 0;
  std::vector<Phase> phases_;
};

}  // namespace rsoc

#endif  // RSOC_CONTACT_HPP_
