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

#include "rsoc/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/AutoDiff>

#include "rsoc/errors.hpp"

namespace rsoc {
namespace {

using AutoDiff = Eigen::AutoDiffScalar<Eigen::VectorXd>;

bool AllFinite(const VectorXd& v) { return v.allFinite(); }

// [v; M^-1 (S^T u - h + J^T lambda)] with lambda resolved for rigid contact.
// `stabilization` adds alpha J v to the constraint (Baumgarte, velocity
// level): J vdot + Jdot v = -alpha J v.
template <typename T>
VecX<T> ChainDrift(const PlanarChain& chain, const MatrixXd& selection,
                   const VecX<T>& q, const VecX<T>& v, const VecX<T>& u,
                   bool foot_in_contact, double stabilization) {
  const ChainTerms<T> terms = ComputeChainTerms<T>(chain, q, v);
  const VecX<T> tau_full = selection.transpose().cast<T>() * u;
  VecX<T> generalized = tau_full - terms.h;
  if (foot_in_contact) {
    const MatX<T> J = terms.J;
    const MatX<T> Jdot = terms.Jdot + T(stabilization) * J;
    const VecX<T> lambda =
        ResolveContactForcesT<T>(terms.M, terms.h, J, Jdot, v, tau_full);
    generalized += J.transpose() * lambda;
  }
  const int n = static_cast<int>(q.size());
  VecX<T> out(2 * n);
  out.head(n) = v;
  out.tail(n) = terms.M.llt().solve(generalized);
  return out;
}

bool InContact(const ContactSet& contacts, int foot) {
  return std::find(contacts.begin(), contacts.end(), foot) != contacts.end();
}

}  // namespace

Model::Model(StateSpace space, int control_dim, double dt)
    : space_(std::move(space)), control_dim_(control_dim), dt_(dt) {
  if (!(dt > 0.0)) throw ContractViolation("Model: dt must be positive");
  if (control_dim < 1) {
    throw ContractViolation("Model: control dimension must be >= 1");
  }
}

Tangent Model::DriftWithForces(
    const State& x, const VectorXd& u,
    std::span<const Eigen::Vector2d> /*foot_forces*/) const {
  return Drift(x, u, {});
}

bool Model::DriftJacobians(const State&, const VectorXd&, const ContactSet&,
                           MatrixXd*, MatrixXd*) const {
  return false;
}

MatrixXd Model::NoiseMap(const State&, const VectorXd&) const {
  return MatrixXd::Identity(state_dim(), noise_dim());
}

VectorXd Model::Measure(const State& x, const VectorXd&) const { return x; }

MatrixXd Model::MeasurementJacobian(const State&, const VectorXd&) const {
  return MatrixXd::Identity(measurement_dim(), state_dim());
}

MatrixXd Model::MeasurementNoiseMap(const State&, const VectorXd&) const {
  return MatrixXd::Identity(measurement_dim(), measurement_noise_dim());
}

FootKinematics Model::Foot(const State&, int foot) const {
  throw ContractViolation("Model: foot " + std::to_string(foot) +
                          " does not exist");
}

BaseCoordinates Model::base() const {
  BaseCoordinates out;
  for (int i = 0; i < state_dim(); ++i) out.position.push_back(i);
  return out;
}

void Model::CheckSizes(const State& x, const VectorXd& u) const {
  if (x.size() != state_dim()) {
    throw ContractViolation("Model: state has size " +
                            std::to_string(x.size()) + ", expected " +
                            std::to_string(state_dim()));
  }
  if (u.size() != control_dim_) {
    throw ContractViolation("Model: control has size " +
                            std::to_string(u.size()) + ", expected " +
                            std::to_string(control_dim_));
  }
  if (!AllFinite(u)) throw ContractViolation("Model: non-finite control");
}

State Model::Step(const State& x, const VectorXd& u,
                  const ContactSet& contacts, int phase) const {
  CheckSizes(x, u);
  return space_.Compose(x, dt_ * Drift(x, u, contacts, phase));
}

LinearStep LinearizeFiniteDifference(const Model& model, const State& x,
                                     const VectorXd& u,
                                     const ContactSet& contacts, double eps,
                                     int phase) {
  const int n = model.state_dim();
  const int m = model.control_dim();
  const StateSpace& space = model.space();
  const State next = model.Step(x, u, contacts, phase);

  LinearStep out;
  out.A.resize(n, n);
  out.B.resize(n, m);
  for (int i = 0; i < n; ++i) {
    Tangent d = Tangent::Zero(n);
    d[i] = eps;
    const Tangent plus = space.Difference(
        model.Step(space.Compose(x, d), u, contacts, phase), next);
    const Tangent minus = space.Difference(
        model.Step(space.Compose(x, -d), u, contacts, phase), next);
    out.A.col(i) = (plus - minus) / (2.0 * eps);
  }
  for (int j = 0; j < m; ++j) {
    VectorXd du = VectorXd::Zero(m);
    du[j] = eps;
    const Tangent plus =
        space.Difference(model.Step(x, u + du, contacts, phase), next);
    const Tangent minus =
        space.Difference(model.Step(x, u - du, contacts, phase), next);
    out.B.col(j) = (plus - minus) / (2.0 * eps);
  }
  if (!out.A.allFinite() || !out.B.allFinite()) {
    throw NumericalError("Linearize: non-finite dynamics in stencil (phase " +
                         std::to_string(phase) + ")");
  }
  out.C = model.NoiseMap(x, u);
  out.F = model.MeasurementJacobian(x, u);
  out.D = model.MeasurementNoiseMap(x, u);
  return out;
}

LinearStep Linearize(const Model& model, const State& x, const VectorXd& u,
                     const ContactSet& contacts, int phase) {
  MatrixXd fx, fu;
  model.CheckSizes(x, u);
  if (!model.DriftJacobians(x, u, contacts, &fx, &fu)) {
    return LinearizeFiniteDifference(model, x, u, contacts, 1e-6, phase);
  }
  LinearStep out;
  const int n = model.state_dim();
  out.A = MatrixXd::Identity(n, n) + model.dt() * fx;
  out.B = model.dt() * fu;
  if (!out.A.allFinite() || !out.B.allFinite()) {
    throw NumericalError("Linearize: non-finite Jacobian (phase " +
                         std::to_string(phase) + ")");
  }
  out.C = model.NoiseMap(x, u);
  out.F = model.MeasurementJacobian(x, u);
  out.D = model.MeasurementNoiseMap(x, u);
  return out;
}

// ---------------------------------------------------------------------------

LinearModel::LinearModel(MatrixXd A, MatrixXd B, double dt, MatrixXd C)
    : Model(StateSpace::Euclidean(static_cast<int>(A.rows())),
            static_cast<int>(B.cols()), dt),
      A_(std::move(A)),
      B_(std::move(B)),
      C_(std::move(C)) {
  if (A_.rows() != A_.cols() || B_.rows() != A_.rows()) {
    throw ContractViolation("LinearModel: A must be square and match B rows");
  }
  if (C_.size() == 0) C_ = MatrixXd::Identity(A_.rows(), A_.rows());
  if (C_.rows() != A_.rows()) {
    throw ContractViolation("LinearModel: noise map rows != state dim");
  }
}

LinearModel LinearModel::FromContinuous(const MatrixXd& Ac,
                                        const MatrixXd& Bc, double dt) {
  return LinearModel(MatrixXd::Identity(Ac.rows(), Ac.cols()) + dt * Ac,
                     dt * Bc, dt);
}

LinearModel LinearModel::DoubleIntegrator(double dt) {
  MatrixXd Ac(2, 2);
  Ac << 0.0, 1.0, 0.0, 0.0;
  MatrixXd Bc(2, 1);
  Bc << 0.0, 1.0;
  return FromContinuous(Ac, Bc, dt);
}

Tangent LinearModel::Drift(const State& x, const VectorXd& u,
                           const ContactSet&, int) const {
  return ((A_ * x - x) + B_ * u) / dt();
}

bool LinearModel::DriftJacobians(const State&, const VectorXd&,
                                 const ContactSet&, MatrixXd* fx,
                                 MatrixXd* fu) const {
  *fx = (A_ - MatrixXd::Identity(A_.rows(), A_.cols())) / dt();
  *fu = B_ / dt();
  return true;
}

MatrixXd LinearModel::NoiseMap(const State&, const VectorXd&) const {
  return C_;
}

BaseCoordinates LinearModel::base() const {
  BaseCoordinates out;
  const int n = state_dim();
  if (n % 2 == 0) {
    for (int i = 0; i < n / 2; ++i) {
      out.position.push_back(i);
      out.velocity.push_back(n / 2 + i);
    }
  } else {
    for (int i = 0; i < n; ++i) out.position.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------

Pendulum::Pendulum(PendulumParams params, double dt)
    : Model(StateSpace({ComponentKind::kAngle, ComponentKind::kLinear}), 1,
            dt),
      params_(params) {
  if (!(params_.mass > 0.0) || !(params_.length > 0.0)) {
    throw ContractViolation("Pendulum: mass and length must be positive");
  }
}

Tangent Pendulum::Drift(const State& x, const VectorXd& u, const ContactSet&,
                        int) const {
  const auto& p = params_;
  const double inertia = p.mass * p.length * p.length;
  const double torque = std::clamp(u[0], -p.torque_limit, p.torque_limit);
  Tangent out(2);
  out << x[1],
      (torque - p.mass * p.gravity * p.length * std::sin(x[0]) -
       p.damping * x[1]) /
          inertia;
  return out;
}

bool Pendulum::DriftJacobians(const State& x, const VectorXd& u,
                              const ContactSet&, MatrixXd* fx,
                              MatrixXd* fu) const {
  const auto& p = params_;
  const double inertia = p.mass * p.length * p.length;
  fx->resize(2, 2);
  *fx << 0.0, 1.0, -p.gravity / p.length * std::cos(x[0]),
      -p.damping / inertia;
  fu->resize(2, 1);
  const bool saturated = std::abs(u[0]) > p.torque_limit;
  (*fu) << 0.0, saturated ? 0.0 : 1.0 / inertia;
  return true;
}

BaseCoordinates Pendulum::base() const {
  BaseCoordinates out;
  out.position = {0};
  out.velocity = {1};
  return out;
}

// ---------------------------------------------------------------------------

ChainModel::ChainModel(PlanarChain chain, double dt,
                       double contact_stabilization)
    : Model(StateSpace::Euclidean(2 * chain.num_coords()), chain.num_joints(),
            dt),
      chain_(std::move(chain)),
      stabilization_(contact_stabilization) {
  chain_.Validate();
  if (!(stabilization_ >= 0.0) || !std::isfinite(stabilization_)) {
    throw ContractViolation("ChainModel: contact stabilization must be >= 0");
  }
  selection_ = ActuationMatrix(chain_);
}

Tangent ChainModel::Drift(const State& x, const VectorXd& u,
                          const ContactSet& contacts, int phase) const {
  const int n = num_coords();
  const bool stance = InContact(contacts, 0);
  if (stance) {
    // Conditioning check on the double path; the generic path assumes it.
    const ChainTerms<double> terms =
        ComputeChainTerms<double>(chain_, x.head(n), x.tail(n));
    const VectorXd tau_full = selection_.transpose() * u;
    const MatrixXd J = terms.J;
    const MatrixXd Jdot = terms.Jdot + stabilization_ * J;
    const VectorXd lambda = ResolveContactForces(terms.M, terms.h, J, Jdot,
                                                 x.tail(n), tau_full, phase);
    Tangent out(2 * n);
    out.head(n) = x.tail(n);
    out.tail(n) = terms.M.llt().solve(tau_full - terms.h +
                                      terms.J.transpose() * lambda);
    return out;
  }
  return ChainDrift<double>(chain_, selection_, VectorXd(x.head(n)),
                            VectorXd(x.tail(n)), u, false, 0.0);
}

Tangent ChainModel::DriftWithForces(
    const State& x, const VectorXd& u,
    std::span<const Eigen::Vector2d> foot_forces) const {
  const int n = num_coords();
  const ChainTerms<double> terms =
      ComputeChainTerms<double>(chain_, x.head(n), x.tail(n));
  VectorXd generalized = selection_.transpose() * u - terms.h;
  if (!foot_forces.empty()) generalized += terms.J.transpose() * foot_forces[0];
  Tangent out(2 * n);
  out.head(n) = x.tail(n);
  out.tail(n) = terms.M.llt().solve(generalized);
  return out;
}

bool ChainModel::DriftJacobians(const State& x, const VectorXd& u,
                                const ContactSet& contacts, MatrixXd* fx,
                                MatrixXd* fu) const {
  const int n = num_coords();
  const int nx = 2 * n;
  const int nu = control_dim();
  const int nd = nx + nu;
  VecX<AutoDiff> q(n), v(n), tau(nu);
  for (int i = 0; i < n; ++i) {
    q[i] = AutoDiff(x[i], nd, i);
    v[i] = AutoDiff(x[n + i], nd, n + i);
  }
  for (int j = 0; j < nu; ++j) tau[j] = AutoDiff(u[j], nd, nx + j);

  const VecX<AutoDiff> f =
      ChainDrift<AutoDiff>(chain_, selection_, q, v, tau,
                           InContact(contacts, 0), stabilization_);
  fx->resize(nx, nx);
  fu->resize(nx, nu);
  for (int r = 0; r < nx; ++r) {
    const VectorXd& d = f[r].derivatives();
    if (d.size() == 0) {
      fx->row(r).setZero();
      fu->row(r).setZero();
      continue;
    }
    fx->row(r) = d.head(nx).transpose();
    fu->row(r) = d.tail(nu).transpose();
  }
  return true;
}

FootKinematics ChainModel::Foot(const State& x, int foot) const {
  if (foot != 0) return Model::Foot(x, foot);
  const int n = num_coords();
  const ChainTerms<double> terms =
      ComputeChainTerms<double>(chain_, x.head(n), x.tail(n));
  FootKinematics out;
  out.position = terms.foot_position;
  out.velocity = terms.foot_velocity;
  out.J = terms.J;
  out.Jdot = terms.Jdot;
  return out;
}

BaseCoordinates ChainModel::base() const {
  BaseCoordinates out;
  const int n = num_coords();
  if (chain_.base == BaseKind::kFloating) {
    out.position = {0, 1};
    out.velocity = {n, n + 1};
    out.height = 1;
  } else {
    for (int i = 0; i < n; ++i) {
      out.position.push_back(i);
      out.velocity.push_back(n + i);
    }
  }
  return out;
}

double ChainModel::Energy(const State& x) const {
  const int n = num_coords();
  return ChainEnergy(chain_, x.head(n), x.tail(n));
}

PlanarChain MonopedChain(const MonopedParams& params) {
  PlanarChain chain;
  chain.lengths = {params.thigh_length, params.shank_length};
  chain.masses = {params.knee_mass, params.foot_mass};
  chain.base = BaseKind::kFloating;
  chain.base_mass = params.base_mass;
  chain.gravity = params.gravity;
  chain.foot_link = 1;
  return chain;
}

std::unique_ptr<ChainModel> MakeMonoped(const MonopedParams& params,
                                        double dt) {
  return std::make_unique<ChainModel>(MonopedChain(params), dt,
                                      params.contact_stabilization);
}

}  // namespace rsoc
