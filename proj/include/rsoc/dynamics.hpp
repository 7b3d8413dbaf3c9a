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

#ifndef RSOC_DYNAMICS_HPP_
#define RSOC_DYNAMICS_HPP_

#include <limits>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rsoc/chain.hpp"
#include "rsoc/contact.hpp"
#include "rsoc/statespace.hpp"

namespace rsoc {

// One time step's linearization: dx' = A dx + B du + C w, dy = F dx + D g.
struct LinearStep {
  MatrixXd A;
  MatrixXd B;
  MatrixXd C;
  MatrixXd F;
  MatrixXd D;
};

// Which tangent coordinates describe the base, for success checks and
// reporting. `height` is -1 when the model has no vertical coordinate.
struct BaseCoordinates {
  std::vector<int> position;
  std::vector<int> velocity;
  int height = -1;
};

// Continuous-time model x' = f_n(x, u) on a StateSpace, stepped with
// explicit Euler at dt: x+ = x (+) dt f_n(x, u). The active contact set
// selects the phase dynamics f_n.
class Model {
 public:
  Model(StateSpace space, int control_dim, double dt);
  virtual ~Model() = default;

  const StateSpace& space() const { return space_; }
  int state_dim() const { return space_.tangent_dim(); }
  int control_dim() const { return control_dim_; }
  double dt() const { return dt_; }

  virtual int num_feet() const { return 0; }
  virtual int noise_dim() const { return state_dim(); }
  virtual int measurement_dim() const { return state_dim(); }
  virtual int measurement_noise_dim() const { return measurement_dim(); }

  // Tangent velocity. `phase` only tags errors.
  virtual Tangent Drift(const State& x, const VectorXd& u,
                        const ContactSet& contacts, int phase = -1) const = 0;

  // Tangent velocity with prescribed external forces at the feet (one 2D
  // force per foot, world frame). Models without feet ignore the forces.
  virtual Tangent DriftWithForces(
      const State& x, const VectorXd& u,
      std::span<const Eigen::Vector2d> foot_forces) const;

  // Continuous Jacobians of Drift in tangent coordinates, if the model
  // provides them.
  virtual bool DriftJacobians(const State& x, const VectorXd& u,
                              const ContactSet& contacts, MatrixXd* fx,
                              MatrixXd* fu) const;

  // Process-noise map C (tangent x noise_dim). Identity by default.
  virtual MatrixXd NoiseMap(const State& x, const VectorXd& u) const;
  // Measurement g(x, u); full-state chart by default.
  virtual VectorXd Measure(const State& x, const VectorXd& u) const;
  virtual MatrixXd MeasurementJacobian(const State& x,
                                       const VectorXd& u) const;
  virtual MatrixXd MeasurementNoiseMap(const State& x,
                                       const VectorXd& u) const;

  virtual FootKinematics Foot(const State& x, int foot) const;
  virtual BaseCoordinates base() const;

  // x (+) dt f_n(x, u). Throws ContractViolation on bad sizes or non-finite u.
  State Step(const State& x, const VectorXd& u, const ContactSet& contacts,
             int phase = -1) const;

  void CheckSizes(const State& x, const VectorXd& u) const;

 private:
  StateSpace space_;
  int control_dim_;
  double dt_;
};

// Central finite differences on the (+)/(-) chart with step `eps`.
LinearStep LinearizeFiniteDifference(const Model& model, const State& x,
                                     const VectorXd& u,
                                     const ContactSet& contacts,
                                     double eps = 1e-6, int phase = -1);

// Analytic Jacobians when the model supplies them, finite differences
// otherwise. C, F, D come from the model's noise and measurement maps.
LinearStep Linearize(const Model& model, const State& x, const VectorXd& u,
                     const ContactSet& contacts, int phase = -1);

// x+ = A x + B u with noise map C, on a Euclidean space.
class LinearModel : public Model {
 public:
  // Discrete-time matrices.
  LinearModel(MatrixXd A, MatrixXd B, double dt, MatrixXd C = MatrixXd());
  // x' = Ac x + Bc u, discretized by explicit Euler.
  static LinearModel FromContinuous(const MatrixXd& Ac, const MatrixXd& Bc,
                                    double dt);
  // Position/velocity pair driven by a force: A = [[1, dt], [0, 1]].
  static LinearModel DoubleIntegrator(double dt);

  const MatrixXd& A() const { return A_; }
  const MatrixXd& B() const { return B_; }

  int noise_dim() const override { return static_cast<int>(C_.cols()); }
  Tangent Drift(const State& x, const VectorXd& u, const ContactSet& contacts,
                int phase = -1) const override;
  bool DriftJacobians(const State& x, const VectorXd& u,
                      const ContactSet& contacts, MatrixXd* fx,
                      MatrixXd* fu) const override;
  MatrixXd NoiseMap(const State& x, const VectorXd& u) const override;
  BaseCoordinates base() const override;

 private:
  MatrixXd A_;
  MatrixXd B_;
  MatrixXd C_;
};

struct PendulumParams {
  double mass = 1.0;
  double length = 1.0;
  double gravity = 9.81;
  double damping = 0.0;
  double torque_limit = std::numeric_limits<double>::infinity();
};

// Angle measured from the hanging equilibrium; state [theta, omega] with
// theta on SO(2).
class Pendulum : public Model {
 public:
  Pendulum(PendulumParams params, double dt);

  const PendulumParams& params() const { return params_; }

  Tangent Drift(const State& x, const VectorXd& u, const ContactSet& contacts,
                int phase = -1) const override;
  bool DriftJacobians(const State& x, const VectorXd& u,
                      const ContactSet& contacts, MatrixXd* fx,
                      MatrixXd* fu) const override;
  BaseCoordinates base() const override;

 private:
  PendulumParams params_;
};

// Planar chain with one point foot, joints actuated, rigid foot contact in
// stance. State [q; v] on a Euclidean space. Drift Jacobians come from
// forward-mode automatic differentiation of the same dynamics code.
//
// contact_stabilization (1/s) damps the foot velocity in stance:
// J vdot + Jdot v = -alpha J v. Zero gives the plain rigid constraint; a
// positive value stops explicit Euler from letting the foot drift.
class ChainModel : public Model {
 public:
  ChainModel(PlanarChain chain, double dt, double contact_stabilization = 0.0);

  const PlanarChain& chain() const { return chain_; }
  int num_coords() const { return chain_.num_coords(); }

  int num_feet() const override { return 1; }
  Tangent Drift(const State& x, const VectorXd& u, const ContactSet& contacts,
                int phase = -1) const override;
  Tangent DriftWithForces(
      const State& x, const VectorXd& u,
      std::span<const Eigen::Vector2d> foot_forces) const override;
  bool DriftJacobians(const State& x, const VectorXd& u,
                      const ContactSet& contacts, MatrixXd* fx,
                      MatrixXd* fu) const override;
  FootKinematics Foot(const State& x, int foot) const override;
  BaseCoordinates base() const override;

  double Energy(const State& x) const;
  double contact_stabilization() const { return stabilization_; }

 private:
  PlanarChain chain_;
  MatrixXd selection_;
  double stabilization_ = 0.0;
};

struct MonopedParams {
  double base_mass = 1.0;
  double thigh_length = 0.16;
  double shank_length = 0.16;
  double knee_mass = 0.15;
  double foot_mass = 0.05;
  double gravity = 9.81;
  double contact_stabilization = 0.0;
};

// Floating base (x, z) + hip + knee: 4 coordinates, 8 states, 2 torques.
PlanarChain MonopedChain(const MonopedParams& params);
std::unique_ptr<ChainModel> MakeMonoped(const MonopedParams& params,
                                        double dt);

}  // namespace rsoc

#endif  // RSOC_DYNAMICS_HPP_
