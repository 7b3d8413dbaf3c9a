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

#include "rsoc/chain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsoc/errors.hpp"

namespace rsoc {

double PlanarChain::total_mass() const {
  double m = base == BaseKind::kFloating ? base_mass : 0.0;
  for (double mi : masses) m += mi;
  return m;
}

void PlanarChain::Validate() const {
  if (lengths.empty() || lengths.size() != masses.size()) {
    throw ContractViolation(
        "PlanarChain: need one mass per link and at least one link");
  }
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    if (!(lengths[i] > 0.0) || !(masses[i] > 0.0)) {
      throw ContractViolation("PlanarChain: link " + std::to_string(i) +
                              " must have positive length and mass");
    }
  }
  if (base == BaseKind::kFloating && !(base_mass > 0.0)) {
    throw ContractViolation("PlanarChain: floating base needs positive mass");
  }
  if (foot_link >= num_joints()) {
    throw ContractViolation("PlanarChain: foot link index out of range");
  }
}

ChainTerms<double> ChainDynamics(const PlanarChain& chain,
                                 const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& v) {
  chain.Validate();
  if (q.size() != chain.num_coords() || v.size() != chain.num_coords()) {
    throw ContractViolation("ChainDynamics: q/v size does not match chain");
  }
  return ComputeChainTerms<double>(chain, q, v);
}

double ChainEnergy(const PlanarChain& chain, const Eigen::VectorXd& q,
                   const Eigen::VectorXd& v) {
  const ChainTerms<double> terms = ChainDynamics(chain, q, v);
  const double kinetic = 0.5 * v.dot(terms.M * v);

  const int nb = chain.base_dofs();
  double z = nb == 2 ? q[1] : 0.0;
  double potential = nb == 2 ? chain.base_mass * chain.gravity * z : 0.0;
  double phi = 0.0;
  for (int i = 0; i < chain.num_joints(); ++i) {
    phi += q[nb + i];
    z -= chain.lengths[i] * std::cos(phi);
    potential += chain.masses[i] * chain.gravity * z;
  }
  return kinetic + potential;
}

Eigen::MatrixXd ActuationMatrix(const PlanarChain& chain) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(chain.num_joints(),
                                            chain.num_coords());
  S.rightCols(chain.num_joints()).setIdentity();
  return S;
}

Eigen::Vector2d TwoLinkInverseKinematics(double l1, double l2,
                                         const Eigen::Vector2d& foot_from_hip,
                                         double knee_sign) {
  const double r2 = foot_from_hip.squaredNorm();
  const double c2 =
      std::clamp((r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
  const double knee = (knee_sign >= 0.0 ? 1.0 : -1.0) * std::acos(c2);
  const double reach = std::atan2(foot_from_hip.x(), -foot_from_hip.y());
  const double offset =
      std::atan2(l2 * std::sin(knee), l1 + l2 * std::cos(knee));
  return {reach - offset, knee};
}

}  // namespace rsoc
