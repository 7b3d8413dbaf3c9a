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

#ifndef RSOC_CHAIN_HPP_
#define RSOC_CHAIN_HPP_

#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace rsoc {

enum class BaseKind { kFixed, kFloating };

// Planar serial chain of revolute joints. Each link is a massless rod with a
// point mass at its distal end; a floating base adds a point mass with (x, z)
// translation. Joint angles are relative, measured from the downward vertical
// for the first link. Generalized coordinates: [x, z]? followed by the joints.
struct PlanarChain {
  std::vector<double> lengths;
  std::vector<double> masses;
  BaseKind base = BaseKind::kFixed;
  double base_mass = 0.0;
  double gravity = 9.81;
  // Link whose distal end is the point foot; -1 selects the last link.
  int foot_link = -1;

  int num_joints() const { return static_cast<int>(lengths.size()); }
  int base_dofs() const { return base == BaseKind::kFloating ? 2 : 0; }
  int num_coords() const { return base_dofs() + num_joints(); }
  int foot() const { return foot_link < 0 ? num_joints() - 1 : foot_link; }
  double total_mass() const;

  // Throws ContractViolation on non-positive lengths/masses.
  void Validate() const;
};

template <typename T>
using VecX = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using MatX = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

// Rigid-body terms of M(q) vdot + h(q, v) = S^T tau + J^T lambda, plus the
// point-foot kinematics.
template <typename T>
struct ChainTerms {
  MatX<T> M;
  VecX<T> h;
  Eigen::Matrix<T, 2, Eigen::Dynamic> J;
  Eigen::Matrix<T, 2, Eigen::Dynamic> Jdot;
  Eigen::Matrix<T, 2, 1> foot_position;
  Eigen::Matrix<T, 2, 1> foot_velocity;
};

// Scalar-generic so that the same code path can be differentiated exactly
// with forward-mode automatic differentiation.
template <typename T>
ChainTerms<T> ComputeChainTerms(const PlanarChain& chain, const VecX<T>& q,
                                const VecX<T>& v) {
  using std::cos;
  using std::sin;
  const int nb = chain.base_dofs();
  const int nl = chain.num_joints();
  const int n = nb + nl;
  const int foot = chain.foot();
  const T g(chain.gravity);

  std::vector<T> sn(nl), cs(nl), rate(nl);
  T phi(0.0), phi_dot(0.0);
  for (int j = 0; j < nl; ++j) {
    phi = phi + q[nb + j];
    phi_dot = phi_dot + v[nb + j];
    sn[j] = sin(phi);
    cs[j] = cos(phi);
    rate[j] = phi_dot;
  }

  ChainTerms<T> out;
  out.M = MatX<T>::Zero(n, n);
  out.h = VecX<T>::Zero(n);
  out.J = Eigen::Matrix<T, 2, Eigen::Dynamic>::Zero(2, n);
  out.Jdot = Eigen::Matrix<T, 2, Eigen::Dynamic>::Zero(2, n);

  if (nb == 2) {
    const T mb(chain.base_mass);
    out.M(0, 0) += mb;
    out.M(1, 1) += mb;
    out.h(1) += mb * g;
  }

  Eigen::Matrix<T, 2, 1> position;
  if (nb == 2) {
    position << q[0], q[1];
  } else {
    position << T(0.0), T(0.0);
  }

  Eigen::Matrix<T, 2, Eigen::Dynamic> Ji(2, n), Jdi(2, n);
  for (int i = 0; i < nl; ++i) {
    const T li(chain.lengths[i]);
    position(0) += li * sn[i];
    position(1) -= li * cs[i];

    // Column k of the mass-i Jacobian sums links k..i.
    Ji.setZero();
    Jdi.setZero();
    if (nb == 2) {
      Ji(0, 0) = T(1.0);
      Ji(1, 1) = T(1.0);
    }
    T jx(0.0), jz(0.0), djx(0.0), djz(0.0);
    for (int k = i; k >= 0; --k) {
      const T lk(chain.lengths[k]);
      jx += lk * cs[k];
      jz += lk * sn[k];
      djx -= lk * rate[k] * sn[k];
      djz += lk * rate[k] * cs[k];
      Ji(0, nb + k) = jx;
      Ji(1, nb + k) = jz;
      Jdi(0, nb + k) = djx;
      Jdi(1, nb + k) = djz;
    }

    const T mi(chain.masses[i]);
    out.M.noalias() += mi * Ji.transpose() * Ji;
    const Eigen::Matrix<T, 2, 1> bias = Jdi * v;
    out.h.noalias() += mi * Ji.transpose() * bias;
    out.h += (mi * g) * Ji.row(1).transpose();

    if (i == foot) {
      out.J = Ji;
      out.Jdot = Jdi;
      out.foot_position = position;
      out.foot_velocity = Ji * v;
    }
  }
  return out;
}

// Validated double-precision evaluation.
ChainTerms<double> ChainDynamics(const PlanarChain& chain,
                                 const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& v);

// Kinetic plus gravitational potential energy.
double ChainEnergy(const PlanarChain& chain, const Eigen::VectorXd& q,
                   const Eigen::VectorXd& v);

// Selection matrix S (joints x coords) mapping joint torques into
// generalized forces as S^T tau. Base coordinates are unactuated.
Eigen::MatrixXd ActuationMatrix(const PlanarChain& chain);

// Base (or origin) to foot inverse kinematics for a two-link leg. Returns
// joint angles (hip, knee) with the knee bending in `knee_sign` direction.
Eigen::Vector2d TwoLinkInverseKinematics(double l1, double l2,
                                         const Eigen::Vector2d& foot_from_hip,
                                         double knee_sign);

}  // namespace rsoc

#endif  // RSOC_CHAIN_HPP_
