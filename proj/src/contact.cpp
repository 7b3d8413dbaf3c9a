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

#include "rsoc/contact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rsoc/errors.hpp"

namespace rsoc {
namespace {

constexpr double kMaxContactCondition = 1e12;
constexpr double kSvdCutoff = 1e-10;

bool Contains(const ContactSet& set, int foot) {
  return std::binary_search(set.begin(), set.end(), foot);
}

}  // namespace

VectorXd ResolveContactForces(const MatrixXd& M, const VectorXd& h,
                              const MatrixXd& J, const MatrixXd& Jdot,
                              const VectorXd& v, const VectorXd& tau_full,
                              int phase) {
  const int n = static_cast<int>(M.rows());
  if (M.cols() != n || h.size() != n || v.size() != n ||
      tau_full.size() != n || J.cols() != n || Jdot.cols() != n ||
      Jdot.rows() != J.rows()) {
    throw ContractViolation("ResolveContactForces: dimension mismatch");
  }
  if (J.rows() == 0) return VectorXd(0);

  Eigen::LLT<MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("ResolveContactForces: mass matrix not SPD");
  }
  const MatrixXd minv_jt = llt.solve(J.transpose());
  const MatrixXd contact_inv = Symmetrize(J * minv_jt);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(contact_inv,
                                              Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const double condition =
      lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (condition > kMaxContactCondition) throw SingularContact(phase, condition);

  const VectorXd rhs =
      -(Jdot * v) + minv_jt.transpose() * h - minv_jt.transpose() * tau_full;
  return contact_inv.llt().solve(rhs);
}

MatrixXd Pseudoinverse(const MatrixXd& A) {
  if (A.rows() == 0 || A.cols() == 0) return MatrixXd::Zero(A.cols(), A.rows());
  if (A.rows() <= A.cols()) {
    Eigen::LLT<MatrixXd> llt(A * A.transpose());
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-14) {
      return llt.solve(A).transpose();
    }
  }
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  const double cutoff = kSvdCutoff * sv(0);
  VectorXd inv = VectorXd::Zero(sv.size());
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

MatrixXd NullspaceProjector(const MatrixXd& A, int dim) {
  if (A.cols() != dim && A.rows() > 0) {
    throw ContractViolation("NullspaceProjector: column count != dim");
  }
  MatrixXd P = MatrixXd::Identity(dim, dim);
  if (A.rows() == 0) return P;
  P -= Pseudoinverse(A) * A;
  return P;
}

MatrixXd EndEffectorMap(const MatrixXd& J, const MatrixXd& Jdot) {
  if (J.rows() != Jdot.rows() || J.cols() != Jdot.cols()) {
    throw ContractViolation("EndEffectorMap: J and Jdot shapes differ");
  }
  const Eigen::Index r = J.rows();
  const Eigen::Index c = J.cols();
  MatrixXd A = MatrixXd::Zero(2 * r, 2 * c);
  A.topLeftCorner(r, c) = J;
  A.bottomLeftCorner(r, c) = Jdot;
  A.bottomRightCorner(r, c) = J;
  return A;
}

SwingMap MakeSwingMap(std::span<const FootKinematics> swing,
                      std::span<const FootKinematics> active,
                      int tangent_dim) {
  auto stack = [tangent_dim](std::span<const FootKinematics> feet) {
    MatrixXd out(4 * static_cast<Eigen::Index>(feet.size()), tangent_dim);
    for (std::size_t i = 0; i < feet.size(); ++i) {
      const MatrixXd block = EndEffectorMap(feet[i].J, feet[i].Jdot);
      if (block.cols() != tangent_dim) {
        throw ContractViolation("MakeSwingMap: foot Jacobian width mismatch");
      }
      out.middleRows(4 * static_cast<Eigen::Index>(i), 4) = block;
    }
    return out;
  };
  return {stack(swing), stack(active)};
}

MatrixXd ProjectContactCovariance(const MatrixXd& gamma_fs,
                                  const MatrixXd& gamma_c,
                                  const SwingMap& swing,
                                  bool project_nullspace) {
  if (!IsPsd(gamma_fs) || !IsPsd(gamma_c)) {
    throw ContractViolation(
        "ProjectContactCovariance: covariances must be symmetric PSD");
  }
  const Eigen::Index n = gamma_fs.rows();
  if (gamma_c.rows() != swing.A_s.rows()) {
    throw ContractViolation(
        "ProjectContactCovariance: Gamma_c does not match swing map rows");
  }
  if (swing.A_s.rows() == 0) return gamma_fs;
  if (swing.A_s.cols() != n) {
    throw ContractViolation(
        "ProjectContactCovariance: swing map width != Gamma_fs size");
  }
  MatrixXd lift = Pseudoinverse(swing.A_s);
  if (project_nullspace) {
    lift = NullspaceProjector(swing.A_c, static_cast<int>(n)) * lift;
  }
  return Symmetrize(gamma_fs + lift * gamma_c * lift.transpose());
}

PhaseSchedule::PhaseSchedule(
    int num_feet, const std::vector<std::pair<ContactSet, int>>& phases)
    : num_feet_(num_feet) {
  if (phases.empty()) throw ContractViolation("PhaseSchedule: no phases");
  int start = 0;
  for (const auto& [contacts, duration] : phases) {
    if (duration < 1) {
      throw ContractViolation("PhaseSchedule: phase duration must be >= 1");
    }
    ContactSet sorted = contacts;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ContractViolation("PhaseSchedule: duplicate foot in contact set");
    }
    for (int f : sorted) {
      if (f < 0 || f >= num_feet) {
        throw ContractViolation("PhaseSchedule: foot index " +
                                std::to_string(f) + " out of range");
      }
    }
    phases_.push_back({std::move(sorted), start, start + duration});
    start += duration;
  }
  horizon_ = start;
}

PhaseSchedule PhaseSchedule::Single(int num_feet, ContactSet contacts,
                                    int horizon) {
  return PhaseSchedule(num_feet, {{std::move(contacts), horizon}});
}

int PhaseSchedule::PhaseIndex(int t) const {
  if (t < 0 || t >= horizon_) {
    throw ContractViolation("PhaseSchedule: step " + std::to_string(t) +
                            " outside [0, " + std::to_string(horizon_) + ")");
  }
  auto it = std::upper_bound(
      phases_.begin(), phases_.end(), t,
      [](int step, const Phase& p) { return step < p.start; });
  return static_cast<int>(std::distance(phases_.begin(), it)) - 1;
}

const ContactSet& PhaseSchedule::Contacts(int t) const {
  return phases_[PhaseIndex(t)].contacts;
}

ActivePhase PhaseSchedule::Active(int t) const {
  const int id = PhaseIndex(t);
  ActivePhase out;
  out.id = id;
  out.contacts = phases_[id].contacts;
  for (int f = 0; f < num_feet_; ++f) {
    if (!Contains(out.contacts, f)) out.swing.push_back(f);
  }
  return out;
}

bool PhaseSchedule::IsSwitchStep(int t) const {
  for (std::size_t i = 1; i < phases_.size(); ++i) {
    if (phases_[i].start == t) return true;
  }
  return false;
}

bool PhaseSchedule::InLandingWindow(int foot, int t, double fraction) const {
  if (t < 0 || t >= horizon_ || Contains(Contacts(t), foot)) return false;
  int begin = t;
  while (begin > 0 && !Contains(Contacts(begin - 1), foot)) --begin;
  int end = t + 1;
  while (end < horizon_ && !Contains(Contacts(end), foot)) ++end;
  if (end >= horizon_) return false;  // never lands within the horizon
  const double length = end - begin;
  return (t - begin) >= (1.0 - fraction) * length - 1e-9;
}

std::vector<int> PhaseSchedule::Touchdowns(int foot) const {
  std::vector<int> out;
  for (std::size_t i = 1; i < phases_.size(); ++i) {
    if (Contains(phases_[i].contacts, foot) &&
        !Contains(phases_[i - 1].contacts, foot)) {
      out.push_back(phases_[i].start);
    }
  }
  return out;
}

}  // namespace rsoc
