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

#include "rsoc/references.hpp"

#include <cmath>
#include <vector>

#include "rsoc/chain.hpp"
#include "rsoc/errors.hpp"

namespace rsoc {
namespace {

void CheckStates(const Model& model, const State& x0, const State& target,
                 int horizon) {
  if (horizon < 1) throw ContractViolation("reference horizon must be >= 1");
  if (x0.size() != model.state_dim() || target.size() != model.state_dim()) {
    throw ContractViolation("reference state has wrong dimension");
  }
}

}  // namespace

Reference HoldReference(const Model& model, const State& x0,
                        const State& target, int horizon) {
  CheckStates(model, x0, target, horizon);
  Reference ref;
  ref.schedule = PhaseSchedule::Single(model.num_feet(), {}, horizon);
  ref.x.assign(horizon + 1, model.space().Normalize(target));
  ref.u.assign(horizon, VectorXd::Zero(model.control_dim()));
  ref.x0 = model.space().Normalize(x0);
  return ref;
}

Reference LineReference(const Model& model, const State& x0,
                        const State& target, int horizon) {
  CheckStates(model, x0, target, horizon);
  Reference ref = HoldReference(model, x0, target, horizon);
  const StateSpace& space = model.space();
  const Tangent span = space.Difference(target, ref.x0);
  for (int t = 0; t <= horizon; ++t) {
    ref.x[t] = space.Compose(ref.x0, (double(t) / horizon) * span);
  }
  return ref;
}

void LandingSpec::Validate(const ChainModel& model) const {
  const PlanarChain& chain = model.chain();
  if (chain.base != BaseKind::kFloating || chain.lengths.size() != 2) {
    throw ContractViolation("landing reference needs a floating two-link leg");
  }
  const double reach = chain.lengths[0] + chain.lengths[1];
  const double peak = stand_height + chain.gravity * flight_time * flight_time * 4.0 / 27.0;
  if (!(stand_height > 0.0) || peak >= reach) {
    throw ContractViolation("landing reference leaves the leg's workspace");
  }
  const double steps_flight = flight_time / model.dt();
  const double steps_stance = stance_time / model.dt();
  if (std::abs(steps_flight - std::round(steps_flight)) > 1e-9 ||
      std::abs(steps_stance - std::round(steps_stance)) > 1e-9 ||
      std::round(steps_flight) < 1 || std::round(steps_stance) < 1) {
    throw ContractViolation("landing phase durations must be whole steps");
  }
  if (!(settle_time > 0.0) || seed_kp < 0.0 || seed_kd < 0.0) {
    throw ContractViolation("landing settle time and seed gains must be positive");
  }
}

Reference LandingReference(const ChainModel& model, const LandingSpec& spec) {
  spec.Validate(model);
  const PlanarChain& chain = model.chain();
  const double g = chain.gravity;
  const double dt = model.dt();
  const double T = spec.flight_time;
  const int nf = static_cast<int>(std::lround(T / dt));
  const int ns = static_cast<int>(std::lround(spec.stance_time / dt));
  const int N = nf + ns;
  const int n = model.num_coords();
  const double l1 = chain.lengths[0];
  const double l2 = chain.lengths[1];
  const double m_knee = chain.masses[0];
  const double m_foot = chain.masses[1];
  const double m_total = chain.base_mass + m_knee + m_foot;

  auto joints = [&](double leg) {
    return TwoLinkInverseKinematics(l1, l2, Eigen::Vector2d(0.0, -leg),
                                    spec.knee_sign);
  };
  // Centre-of-mass offset from the base with the foot straight below it.
  auto com_offset = [&](double leg) {
    const double hip = joints(leg)[0];
    return Eigen::Vector2d(m_knee * l1 * std::sin(hip) / m_total,
                           (-m_knee * l1 * std::cos(hip) - m_foot * leg) /
                               m_total);
  };
  const Eigen::Vector2d land_offset = com_offset(spec.stand_height);

  // Flight: the centre of mass falls ballistically onto the landing pose
  // while the foot follows a smoothstep from 0.5 g T^2 down to the ground.
  auto flight_coords = [&](double t) {
    const double s = t / T;
    const double foot_z = 0.5 * g * T * T * (1.0 - 3.0 * s * s + 2.0 * s * s * s);
    const Eigen::Vector2d com(
        land_offset.x(),
        spec.stand_height + land_offset.y() + 0.5 * g * (T * T - t * t));
    double base_z = com.y() - land_offset.y();
    for (int it = 0; it < 50; ++it) {
      base_z = com.y() - com_offset(base_z - foot_z).y();
    }
    const double leg = base_z - foot_z;
    const double base_x = com.x() - com_offset(leg).x();
    return VectorXd((VectorXd(n) << base_x, base_z, joints(leg)).finished());
  };
  const double v_land = -(flight_coords(T)[1] - flight_coords(T - dt)[1]) / dt;

  // Stance: the base dips by v t exp(-t / settle_time) over the planted foot.
  auto stance_coords = [&](double t) {
    const double s = t - T;
    const double base_z =
        spec.stand_height - v_land * s * std::exp(-s / spec.settle_time);
    return VectorXd((VectorXd(n) << 0.0, base_z, joints(base_z)).finished());
  };
  // Knot velocities are forward differences, so that an explicit Euler
  // step from one knot lands on the next.
  std::vector<VectorXd> q(N + 2);
  for (int k = 0; k <= N + 1; ++k) {
    q[k] = k < nf ? flight_coords(k * dt) : stance_coords(k * dt);
  }
  Reference ref;
  ref.schedule = PhaseSchedule(1, {{ContactSet{}, nf}, {ContactSet{0}, ns}});
  for (int k = 0; k <= N; ++k) {
    State x(2 * n);
    x << q[k], (q[k + 1] - q[k]) / dt;
    ref.x.push_back(x);
  }
  ref.x0 = ref.x[0];

  const MatrixXd S = ActuationMatrix(chain);
  const int m = static_cast<int>(S.rows());
  MatrixXd seed_gain = MatrixXd::Zero(m, 2 * n);
  for (int j = 0; j < m; ++j) {
    seed_gain(j, n - m + j) = -spec.seed_kp;
    seed_gain(j, 2 * n - m + j) = -spec.seed_kd;
  }
  for (int k = 0; k < N; ++k) {
    const VectorXd q = ref.x[k].head(n);
    const VectorXd v = ref.x[k].tail(n);
    const VectorXd a = (ref.x[k + 1].tail(n) - v) / dt;
    const ChainTerms<double> terms = ChainDynamics(chain, q, v);
    const VectorXd rhs = terms.M * a + terms.h;
    if (k < nf) {
      ref.u.push_back((S * S.transpose()).ldlt().solve(S * rhs));
    } else {
      MatrixXd lhs(n, m + 2);
      lhs << S.transpose(), terms.J.transpose();
      ref.u.push_back(lhs.colPivHouseholderQr().solve(rhs).head(m));
    }
    ref.K_seed.push_back(seed_gain);
  }
  return ref;
}

}  // namespace rsoc
