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

#include "rsoc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "rsoc/analysis.hpp"
#include "rsoc/errors.hpp"

namespace rsoc {
namespace {

constexpr double kDivergedNorm = 1e8;

bool Diverged(const State& x) {
  return !x.allFinite() || x.cwiseAbs().maxCoeff() > kDivergedNorm;
}

int KnotIndex(double t, double dt, int N) {
  const int i = static_cast<int>(std::floor(t / dt + 1e-9));
  return std::clamp(i, 0, N - 1);
}

// Continuous Jacobian of the drift; central differences when the model
// has no analytic one.
MatrixXd DriftJacobian(const Model& model, const State& x, const VectorXd& u,
                       const ContactSet& contacts) {
  MatrixXd fx, fu;
  if (model.DriftJacobians(x, u, contacts, &fx, &fu)) return fx;
  const int n = model.state_dim();
  const double eps = 1e-6;
  fx.resize(n, n);
  for (int i = 0; i < n; ++i) {
    Tangent d = Tangent::Zero(n);
    d[i] = eps;
    fx.col(i) = (model.Drift(model.space().Compose(x, d), u, contacts) -
                 model.Drift(model.space().Compose(x, -d), u, contacts)) /
                (2.0 * eps);
  }
  return fx;
}

// Gaussian samples with covariance `cov` from a standard normal stream.
class NoiseSource {
 public:
  NoiseSource(const MatrixXd& cov, std::uint64_t seed) : rng_(seed) {
    if (cov.size() == 0) return;
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(Symmetrize(cov));
    factor_ = eig.eigenvectors() *
              eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  }
  VectorXd Sample() {
    VectorXd z(factor_.cols());
    for (int i = 0; i < z.size(); ++i) z[i] = normal_(rng_);
    return factor_ * z;
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  MatrixXd factor_;
};

}  // namespace

void SimConfig::Validate() const {
  if (!(dt > 0.0) || !(control_period > 0.0) || !(dt < control_period)) {
    throw ContractViolation(
        "SimConfig: need 0 < dt < control_period");
  }
  if (!(stiffness >= 0.0) || !(damping >= 0.0) || !(friction >= 0.0)) {
    throw ContractViolation(
        "SimConfig: stiffness, damping and friction must be >= 0");
  }
  if (sensor_noise && (!IsPsd(sensor_cov) || sensor_cov.size() == 0)) {
    throw ContractViolation("SimConfig: sensor covariance must be PSD");
  }
}

Terrain::Terrain(std::vector<Block> blocks) : blocks_(std::move(blocks)) {
  std::sort(blocks_.begin(), blocks_.end(),
            [](const Block& a, const Block& b) { return a.x_start < b.x_start; });
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (!(blocks_[i].x_end > blocks_[i].x_start)) {
      throw ContractViolation("Terrain: block " + std::to_string(i) +
                              " has empty extent");
    }
    if (i > 0 && blocks_[i].x_start < blocks_[i - 1].x_end) {
      throw ContractViolation("Terrain: blocks overlap");
    }
  }
}

double Terrain::HeightAt(double x) const {
  for (const Block& b : blocks_) {
    if (x >= b.x_start && x < b.x_end) return b.height;
  }
  return 0.0;
}

std::string Terrain::Fingerprint() const {
  std::ostringstream out;
  out.precision(17);
  for (const Block& b : blocks_) {
    out << b.x_start << ':' << b.x_end << ':' << b.height << ';';
  }
  return out.str();
}

Eigen::Vector2d ContactForce(const Eigen::Vector2d& p,
                             const Eigen::Vector2d& pdot,
                             const Terrain& terrain, const SimConfig& sim) {
  const double depth = terrain.HeightAt(p.x()) - p.y();
  if (depth <= 0.0) return Eigen::Vector2d::Zero();
  const double normal =
      std::max(0.0, sim.stiffness * depth - sim.damping * pdot.y());
  const double limit = sim.friction * normal;
  const double tangential =
      std::clamp(-sim.damping * pdot.x(), -limit, limit);
  return {tangential, normal};
}

PlanSample SamplePlan(const StateSpace& space, const ClosedLoopPlan& plan,
                      double t) {
  const int N = static_cast<int>(plan.nominal.u.size());
  const double s = std::clamp(t / plan.dt, 0.0, static_cast<double>(N));
  const int i = std::min(static_cast<int>(std::floor(s)), N - 1);
  const double frac = s - i;
  PlanSample out;
  const State& x0 = plan.nominal.x[i];
  out.x = space.Compose(x0, frac * space.Difference(plan.nominal.x[i + 1], x0));
  const PolicyStep& p0 = plan.policy.steps[i];
  if (i + 1 < N) {
    const PolicyStep& p1 = plan.policy.steps[i + 1];
    out.u = (1.0 - frac) * plan.nominal.u[i] + frac * plan.nominal.u[i + 1];
    out.k = (1.0 - frac) * p0.k + frac * p1.k;
    out.K = (1.0 - frac) * p0.K + frac * p1.K;
  } else {
    out.u = plan.nominal.u[i];
    out.k = p0.k;
    out.K = p0.K;
  }
  return out;
}

void Trace::WriteCsv(std::ostream& out) const {
  const int nx = rows() ? static_cast<int>(x[0].size()) : 0;
  const int nu = rows() ? static_cast<int>(u[0].size()) : 0;
  const int nf = rows() ? static_cast<int>(force_normal[0].size()) : 0;
  out << "time";
  for (int i = 0; i < nx; ++i) out << ",x" << i;
  for (int i = 0; i < nu; ++i) out << ",u" << i;
  for (int i = 0; i < nf; ++i) out << ",force_normal" << i;
  out << ",kp_norm,kd_norm\n";
  out.precision(17);
  for (int r = 0; r < rows(); ++r) {
    out << time[r];
    for (int i = 0; i < nx; ++i) out << ',' << x[r][i];
    for (int i = 0; i < nu; ++i) out << ',' << u[r][i];
    for (int i = 0; i < nf; ++i) out << ',' << force_normal[r][i];
    out << ',' << kp_norm[r] << ',' << kd_norm[r] << '\n';
  }
}

Trace Rollout(const Model& model, const SimConfig& sim, const Terrain& terrain,
              const ClosedLoopPlan& plan, std::uint64_t seed) {
  sim.Validate();
  const StateSpace& space = model.space();
  const int N = static_cast<int>(plan.nominal.u.size());
  if (N < 1 || static_cast<int>(plan.nominal.x.size()) != N + 1 ||
      static_cast<int>(plan.policy.steps.size()) != N ||
      plan.schedule.horizon() != N) {
    throw ContractViolation("Rollout: plan does not cover the horizon");
  }
  const double horizon = N * plan.dt;
  const int ticks = static_cast<int>(std::llround(horizon / sim.control_period));
  const int substeps =
      std::max(1, static_cast<int>(std::llround(sim.control_period / sim.dt)));
  const double h = sim.control_period / substeps;
  const int nf = model.num_feet();

  std::vector<Eigen::Vector2d> forces(nf, Eigen::Vector2d::Zero());
  auto contact_forces = [&](const State& x) {
    for (int f = 0; f < nf; ++f) {
      const FootKinematics foot = model.Foot(x, f);
      forces[f] = ContactForce(foot.position, foot.velocity, terrain, sim);
    }
  };

  NoiseSource sensor(sim.sensor_noise ? sim.sensor_cov : MatrixXd(), seed);
  State xhat = plan.nominal.x[0];
  MatrixXd sigma = sim.sensor_noise ? sim.sensor_cov : MatrixXd();
  const MatrixXd process = sim.process_cov.size()
                               ? MatrixXd(sim.process_cov *
                                          (sim.control_period / plan.dt))
                               : MatrixXd::Zero(model.state_dim(),
                                                model.state_dim());
  VectorXd u_prev;

  Trace trace;
  State x = space.Normalize(plan.nominal.x[0]);
  for (int j = 0; j <= ticks; ++j) {
    const double t = j * sim.control_period;
    const PlanSample ref = SamplePlan(space, plan, t);

    State feedback_state = x;
    if (sim.sensor_noise) {
      if (j > 0) {
        const ContactSet& c =
            plan.schedule.Contacts(KnotIndex(t - sim.control_period, plan.dt, N));
        const MatrixXd A =
            MatrixXd::Identity(model.state_dim(), model.state_dim()) +
            sim.control_period * DriftJacobian(model, xhat, u_prev, c);
        xhat = space.Compose(xhat,
                             sim.control_period * model.Drift(xhat, u_prev, c));
        sigma = Symmetrize(A * sigma * A.transpose() +
                           model.NoiseMap(xhat, u_prev) * process *
                               model.NoiseMap(xhat, u_prev).transpose());
      }
      const State y = space.Compose(x, sensor.Sample());
      const MatrixXd innovation = Symmetrize(sigma + sim.sensor_cov);
      const MatrixXd gain =
          innovation.ldlt().solve(sigma.transpose()).transpose();
      xhat = space.Compose(xhat, gain * space.Difference(y, xhat));
      sigma = ClipToPsd(Symmetrize(
          (MatrixXd::Identity(sigma.rows(), sigma.cols()) - gain) * sigma));
      feedback_state = xhat;
    }

    const VectorXd u =
        ref.u + ref.k + ref.K * space.Difference(feedback_state, ref.x);
    const GainDecomposition gains = SplitGainsOrWhole(ref.K, space);

    VectorXd peak = VectorXd::Zero(nf);
    if (j == ticks) {
      contact_forces(x);
      for (int f = 0; f < nf; ++f) peak[f] = forces[f].y();
    }
    trace.time.push_back(t);
    trace.x.push_back(x);
    trace.u.push_back(u);
    trace.kp_norm.push_back(gains.kp_norm);
    trace.kd_norm.push_back(gains.kd_norm);
    if (j == ticks) {
      trace.force_normal.push_back(peak);
      break;
    }
    if (!u.allFinite()) {
      trace.force_normal.push_back(peak);
      trace.diverged = true;
      break;
    }

    for (int s = 0; s < substeps; ++s) {
      Tangent drift;
      if (nf > 0) {
        contact_forces(x);
        for (int f = 0; f < nf; ++f) peak[f] = std::max(peak[f], forces[f].y());
        drift = model.DriftWithForces(x, u, forces);
      } else {
        drift = model.Drift(x, u, {});
      }
      x = space.Compose(x, h * drift);
      if (Diverged(x)) break;
    }
    trace.force_normal.push_back(peak);
    u_prev = u;
    if (Diverged(x)) {
      trace.diverged = true;
      break;
    }
  }
  return trace;
}

bool Success(const Trace& trace, const BaseCoordinates& base,
             const State& target, const StateSpace& space,
             const SuccessCriteria& criteria) {
  if (trace.diverged || trace.rows() == 0) return false;
  const Tangent err = space.Difference(trace.x.back(), target);
  double pos = 0.0, vel = 0.0;
  for (int i : base.position) pos += err[i] * err[i];
  for (int i : base.velocity) vel += err[i] * err[i];
  if (std::sqrt(pos) > criteria.position_tolerance) return false;
  if (std::sqrt(vel) > criteria.velocity_tolerance) return false;
  if (base.height >= 0) {
    for (const State& x : trace.x) {
      if (x[base.height] < criteria.fall_height) return false;
    }
  }
  return true;
}

double FirstContactTime(const Trace& trace, int foot, double after) {
  for (int r = 0; r < trace.rows(); ++r) {
    if (trace.time[r] + 1e-12 < after) continue;
    if (foot < trace.force_normal[r].size() && trace.force_normal[r][foot] > 0.0) {
      return trace.time[r];
    }
  }
  return -1.0;
}

}  // namespace rsoc
