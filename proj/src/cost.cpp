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

#include "rsoc/cost.hpp"

#include <string>
#include <utility>

#include "rsoc/errors.hpp"

namespace rsoc {
namespace {

void CheckWeight(const MatrixXd& W, int dim, bool strict, const char* what,
                 int t) {
  if (W.rows() != dim || W.cols() != dim) {
    throw ContractViolation(std::string("CostSpec: ") + what + " at step " +
                            std::to_string(t) + " must be " +
                            std::to_string(dim) + "x" + std::to_string(dim));
  }
  if (!IsPsd(W) || (strict && MinEigenvalue(W) <= 0.0)) {
    throw ContractViolation(std::string("CostSpec: ") + what + " at step " +
                            std::to_string(t) +
                            (strict ? " must be positive definite"
                                    : " must be positive semidefinite"));
  }
}

}  // namespace

CostSpec::CostSpec(StateSpace space, std::vector<MatrixXd> Q,
                   std::vector<MatrixXd> R, MatrixXd Q_terminal,
                   std::vector<State> x_ref, std::vector<VectorXd> u_ref,
                   std::vector<int> switch_steps, double switch_multiplier)
    : space_(std::move(space)),
      Q_(std::move(Q)),
      R_(std::move(R)),
      Q_terminal_(std::move(Q_terminal)),
      x_ref_(std::move(x_ref)),
      u_ref_(std::move(u_ref)),
      switch_multiplier_(switch_multiplier) {
  const int N = horizon();
  const int n = space_.tangent_dim();
  if (N < 1 || static_cast<int>(R_.size()) != N ||
      static_cast<int>(u_ref_.size()) != N ||
      static_cast<int>(x_ref_.size()) != N + 1) {
    throw ContractViolation(
        "CostSpec: need N state/control weights, N+1 state references and N "
        "control references");
  }
  if (!(switch_multiplier_ > 0.0)) {
    throw ContractViolation("CostSpec: switch multiplier must be positive");
  }
  const int m = static_cast<int>(R_[0].rows());
  for (int t = 0; t < N; ++t) {
    CheckWeight(Q_[t], n, false, "Q", t);
    CheckWeight(R_[t], m, true, "R", t);
    if (u_ref_[t].size() != m) {
      throw ContractViolation("CostSpec: control reference " +
                              std::to_string(t) + " has wrong size");
    }
  }
  CheckWeight(Q_terminal_, n, false, "terminal Q", N);
  for (int t = 0; t <= N; ++t) {
    if (x_ref_[t].size() != n) {
      throw ContractViolation("CostSpec: state reference " +
                              std::to_string(t) + " has wrong size");
    }
    x_ref_[t] = space_.Normalize(x_ref_[t]);
  }
  is_switch_.assign(N, false);
  for (int s : switch_steps) {
    if (s <= 0 || s >= N) {
      throw ContractViolation("CostSpec: switch step " + std::to_string(s) +
                              " outside (0, N)");
    }
    is_switch_[s] = true;
  }
}

CostSpec CostSpec::Tracking(const StateSpace& space, const MatrixXd& Q,
                            const MatrixXd& R, const MatrixXd& Q_terminal,
                            std::vector<State> x_ref,
                            std::vector<VectorXd> u_ref,
                            std::vector<int> switch_steps,
                            double switch_multiplier) {
  const std::size_t N = u_ref.size();
  return CostSpec(space, std::vector<MatrixXd>(N, Q),
                  std::vector<MatrixXd>(N, R), Q_terminal, std::move(x_ref),
                  std::move(u_ref), std::move(switch_steps),
                  switch_multiplier);
}

bool CostSpec::IsSwitchStep(int t) const {
  return t >= 0 && t < horizon() && is_switch_[t];
}

MatrixXd CostSpec::StateWeight(int t) const {
  return IsSwitchStep(t) ? MatrixXd(switch_multiplier_ * Q_[t]) : Q_[t];
}

double CostSpec::Stage(int t, const State& x, const VectorXd& u) const {
  const Tangent dx = space_.Difference(x, x_ref_[t]);
  const VectorXd du = u - u_ref_[t];
  return 0.5 * dx.dot(StateWeight(t) * dx) + 0.5 * du.dot(R_[t] * du);
}

double CostSpec::Terminal(const State& x) const {
  const Tangent dx = space_.Difference(x, x_ref_.back());
  return 0.5 * dx.dot(Q_terminal_ * dx);
}

double EvalCost(const CostSpec& spec, const std::vector<State>& xs,
                const std::vector<VectorXd>& us) {
  const int N = spec.horizon();
  if (static_cast<int>(xs.size()) != N + 1 ||
      static_cast<int>(us.size()) != N) {
    throw ContractViolation("EvalCost: trajectory length " +
                            std::to_string(xs.size()) + "/" +
                            std::to_string(us.size()) + " does not match " +
                            "horizon " + std::to_string(N));
  }
  double total = spec.Terminal(xs[N]);
  for (int t = 0; t < N; ++t) total += spec.Stage(t, xs[t], us[t]);
  return total;
}

QuadCost Quadratize(const CostSpec& spec, const State& x_n,
                    const VectorXd& u_n, int t) {
  if (t < 0 || t >= spec.horizon()) {
    throw ContractViolation("Quadratize: step " + std::to_string(t) +
                            " outside horizon");
  }
  QuadCost out;
  out.Q = spec.StateWeight(t);
  out.R = spec.ControlWeight(t);
  const Tangent dx = spec.space().Difference(x_n, spec.x_ref()[t]);
  const VectorXd du = u_n - spec.u_ref()[t];
  out.q = out.Q * dx;
  out.r = out.R * du;
  out.P = MatrixXd::Zero(out.R.rows(), out.Q.rows());
  out.c0 = 0.5 * dx.dot(out.q) + 0.5 * du.dot(out.r);
  return out;
}

QuadCost QuadratizeTerminal(const CostSpec& spec, const State& x_n) {
  QuadCost out;
  out.Q = spec.TerminalWeight();
  const Tangent dx = spec.space().Difference(x_n, spec.x_ref().back());
  out.q = out.Q * dx;
  out.c0 = 0.5 * dx.dot(out.q);
  return out;
}

}  // namespace rsoc
