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

#ifndef RSOC_COST_HPP_
#define RSOC_COST_HPP_

#include <vector>

#include <Eigen/Dense>

#include "rsoc/statespace.hpp"

namespace rsoc {

// Local expansion of one stage cost around a nominal (x_n, u_n):
//   l(x_n (+) dx, u_n + du) = c0 + q'dx + r'du + 0.5 dx'Q dx
//                            + 0.5 du'R du + du'P dx.
// The terminal stage has empty R, r, P.
struct QuadCost {
  MatrixXd Q;
  VectorXd q;
  MatrixXd R;
  VectorXd r;
  MatrixXd P;
  double c0 = 0.0;
};

// Reference-tracking quadratic cost over a fixed horizon N:
//   sum_t 0.5 |x_t (-) xr_t|^2_{Q_t} + 0.5 |u_t - ur_t|^2_{R_t}
//   + 0.5 |x_N (-) xr_N|^2_{Q_N}.
// Switch steps (first step of a later phase) use switch_multiplier * Q_t.
class CostSpec {
 public:
  CostSpec() = default;
  // Per-step weights. Q and R have length N, x_ref N+1, u_ref N.
  CostSpec(StateSpace space, std::vector<MatrixXd> Q, std::vector<MatrixXd> R,
           MatrixXd Q_terminal, std::vector<State> x_ref,
           std::vector<VectorXd> u_ref, std::vector<int> switch_steps = {},
           double switch_multiplier = 100.0);
  // Constant weights.
  static CostSpec Tracking(const StateSpace& space, const MatrixXd& Q,
                           const MatrixXd& R, const MatrixXd& Q_terminal,
                           std::vector<State> x_ref,
                           std::vector<VectorXd> u_ref,
                           std::vector<int> switch_steps = {},
                           double switch_multiplier = 100.0);

  int horizon() const { return static_cast<int>(Q_.size()); }
  const StateSpace& space() const { return space_; }
  const std::vector<State>& x_ref() const { return x_ref_; }
  const std::vector<VectorXd>& u_ref() const { return u_ref_; }
  double switch_multiplier() const { return switch_multiplier_; }
  bool IsSwitchStep(int t) const;

  // Effective weights at step t (switch multiplier applied).
  MatrixXd StateWeight(int t) const;
  const MatrixXd& ControlWeight(int t) const { return R_[t]; }
  const MatrixXd& TerminalWeight() const { return Q_terminal_; }

  double Stage(int t, const State& x, const VectorXd& u) const;
  double Terminal(const State& x) const;

 private:
  StateSpace space_ = StateSpace::Euclidean(1);
  std::vector<MatrixXd> Q_;
  std::vector<MatrixXd> R_;
  MatrixXd Q_terminal_;
  std::vector<State> x_ref_;
  std::vector<VectorXd> u_ref_;
  std::vector<bool> is_switch_;
  double switch_multiplier_ = 100.0;
};

// Total cost of a trajectory. xs has N+1 entries, us N.
double EvalCost(const CostSpec& spec, const std::vector<State>& xs,
                const std::vector<VectorXd>& us);

// Exact expansion of stage t at (x_n, u_n); P is zero for tracking costs.
QuadCost Quadratize(const CostSpec& spec, const State& x_n,
                    const VectorXd& u_n, int t);
QuadCost QuadratizeTerminal(const CostSpec& spec, const State& x_n);

}  // namespace rsoc

#endif  // RSOC_COST_HPP_
