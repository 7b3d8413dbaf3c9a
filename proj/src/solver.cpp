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

#include "rsoc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rsoc/errors.hpp"
#include "rsoc/parallel.hpp"

namespace rsoc {
namespace {

constexpr double kRegStart = 1e-6;

// Omega = L L' for a PSD Omega, via its eigendecomposition.
MatrixXd PsdFactor(const MatrixXd& omega) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(Symmetrize(omega));
  const VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

double MaxAbsFeedforward(const Policy& policy) {
  double out = 0.0;
  for (const PolicyStep& s : policy.steps) {
    if (s.k.size()) out = std::max(out, s.k.cwiseAbs().maxCoeff());
  }
  return out;
}

}  // namespace

std::string SolverModeName(SolverMode mode) {
  switch (mode) {
    case SolverMode::kNeutral:
      return "ddp";
    case SolverMode::kRiskProcess:
      return "risk";
    case SolverMode::kRiskMeasurement:
      return "risk-meas";
  }
  return "unknown";
}

SolverMode ParseSolverMode(const std::string& name) {
  if (name == "ddp") return SolverMode::kNeutral;
  if (name == "risk") return SolverMode::kRiskProcess;
  if (name == "risk-meas") return SolverMode::kRiskMeasurement;
  throw ContractViolation("unknown solver '" + name +
                          "' (expected ddp, risk or risk-meas)");
}

std::string SolveStatusName(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged:
      return "converged";
    case SolveStatus::kMaxIterations:
      return "max_iterations";
    case SolveStatus::kNoProgress:
      return "no_progress";
    case SolveStatus::kBreakdown:
      return "breakdown";
  }
  return "unknown";
}

RiskExpectation RiskCompletion(const ValueQuadratic& next, const MatrixXd& C,
                               const MatrixXd& omega, double sigma,
                               int step) {
  const MatrixXd& S = next.S;
  const VectorXd& s = next.s;
  if (C.rows() != S.rows() || omega.rows() != C.cols() ||
      omega.cols() != C.cols()) {
    throw ContractViolation("RiskCompletion: dimension mismatch");
  }
  RiskExpectation out;
  if (sigma == 0.0) {
    out.M = S;
    out.m_vec = s;
    out.c_bar = next.s_bar + 0.5 * (C.transpose() * S * C * omega).trace();
    return out;
  }
  // With Omega = L L': Lambda^-1 = L N^-1 L', N = I - sigma L'C'S C L, and
  // det(I - sigma C'S C Omega) = det(N).
  const MatrixXd L = PsdFactor(omega);
  const MatrixXd CL = C * L;
  const MatrixXd N = Symmetrize(MatrixXd::Identity(L.cols(), L.cols()) -
                                sigma * CL.transpose() * S * CL);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(N);
  const double lambda_min =
      N.size() ? eig.eigenvalues().minCoeff()
               : std::numeric_limits<double>::infinity();
  if (!(lambda_min > 0.0)) throw NeuroticBreakdown(step, lambda_min);

  const MatrixXd SCL = S * CL;
  const MatrixXd n_inv = eig.eigenvectors() *
                         eig.eigenvalues().cwiseInverse().asDiagonal() *
                         eig.eigenvectors().transpose();
  out.M = Symmetrize(S + sigma * SCL * n_inv * SCL.transpose());
  const VectorXd Ls = CL.transpose() * s;
  out.m_vec = s + sigma * SCL * (n_inv * Ls);
  const double log_det = eig.eigenvalues().array().log().sum();
  out.c_bar = next.s_bar + 0.5 * sigma * Ls.dot(n_inv * Ls) -
              log_det / (2.0 * sigma);
  return out;
}

MatrixXd RiskInflatedHessian(const MatrixXd& S, const MatrixXd& C,
                             const MatrixXd& omega, double sigma) {
  const MatrixXd inner = S.inverse() - sigma * C * omega * C.transpose();
  return Symmetrize(inner.inverse());
}

BackwardResult BackwardPass(const std::vector<LinearStep>& steps,
                            const std::vector<QuadCost>& costs,
                            const QuadCost& terminal, double sigma,
                            SolverMode mode, const MatrixXd& omega,
                            const std::vector<AugmentedStep>* augmented,
                            const BackwardOptions& options) {
  const int N = static_cast<int>(steps.size());
  if (N < 1 || static_cast<int>(costs.size()) != N) {
    throw ContractViolation("BackwardPass: steps and costs must cover horizon");
  }
  const bool meas = mode == SolverMode::kRiskMeasurement;
  if (meas && (augmented == nullptr ||
               static_cast<int>(augmented->size()) != N)) {
    throw ContractViolation(
        "BackwardPass: measurement mode needs one augmented step per step");
  }
  const int n = static_cast<int>(steps[0].A.rows());
  const int m = static_cast<int>(steps[0].B.cols());
  const int na = meas ? 2 * n : n;

  double reg = options.reg_floor;
  for (;;) {
    BackwardResult out;
    out.policy.steps.resize(N);
    out.value.resize(N + 1);
    ValueQuadratic V;
    V.S = MatrixXd::Zero(na, na);
    V.S.topLeftCorner(n, n) = terminal.Q;
    V.s = VectorXd::Zero(na);
    V.s.head(n) = terminal.q;
    V.s_bar = terminal.c0;
    out.value[N] = V;

    bool failed = false;
    for (int t = N - 1; t >= 0; --t) {
      const QuadCost& l = costs[t];
      const MatrixXd& A = meas ? (*augmented)[t].A : steps[t].A;
      const MatrixXd& B = meas ? (*augmented)[t].B : steps[t].B;

      RiskExpectation E;
      if (mode == SolverMode::kNeutral) {
        E.M = V.S;
        E.m_vec = V.s;
        E.c_bar = V.s_bar;
      } else if (meas) {
        E = RiskCompletion(V, (*augmented)[t].C, (*augmented)[t].W, sigma, t);
      } else {
        E = RiskCompletion(V, steps[t].C, omega, sigma, t);
      }

      const MatrixXd MA = E.M * A;
      MatrixXd Qxx = A.transpose() * MA;
      Qxx.topLeftCorner(n, n) += l.Q;
      const MatrixXd Quu = l.R + B.transpose() * E.M * B;
      MatrixXd Qux = B.transpose() * MA;
      Qux.leftCols(n) += l.P;
      VectorXd qx = A.transpose() * E.m_vec;
      qx.head(n) += l.q;
      const VectorXd qu = l.r + B.transpose() * E.m_vec;

      Eigen::LLT<MatrixXd> llt(Quu + reg * MatrixXd::Identity(m, m));
      if (llt.info() != Eigen::Success) {
        failed = true;
        reg = std::max(kRegStart, 2.0 * reg);
        if (reg > options.reg_max) throw RegularizationFailure(t);
        break;
      }
      PolicyStep& ps = out.policy.steps[t];
      ps.k = options.feedforward ? VectorXd(-llt.solve(qu))
                                 : VectorXd::Zero(m);
      const MatrixXd K = -llt.solve(Qux);
      MatrixXd applied;
      if (meas) {
        ps.Kx = K.leftCols(n);
        ps.Kxhat = K.rightCols(n);
        ps.K = ps.Kx + ps.Kxhat;
        // The policy only sees the estimate: u = k + K_cond dxhat.
        applied = MatrixXd::Zero(m, na);
        applied.rightCols(n) = ps.K;
      } else {
        ps.K = K;
        applied = K;
      }

      const VectorXd Quu_k = Quu * ps.k;
      const MatrixXd cross = applied.transpose() * Qux;
      V.S = Symmetrize(Qxx + applied.transpose() * Quu * applied + cross +
                       cross.transpose());
      V.s = qx + applied.transpose() * (Quu_k + qu) + Qux.transpose() * ps.k;
      V.s_bar = E.c_bar + l.c0 + ps.k.dot(qu) + 0.5 * ps.k.dot(Quu_k);
      out.value[t] = V;
      out.d1 += ps.k.dot(qu);
      out.d2 += ps.k.dot(Quu_k);
    }
    if (!failed) {
      out.reg = reg;
      return out;
    }
  }
}

Trajectory SeedRollout(const Problem& problem) {
  const Model& model = *problem.model;
  const int N = problem.schedule.horizon();
  if (static_cast<int>(problem.u_seed.size()) != N) {
    throw ContractViolation("SeedRollout: seed controls must cover horizon");
  }
  const bool feedback = !problem.K_seed.empty();
  if (feedback && (static_cast<int>(problem.K_seed.size()) != N ||
                   static_cast<int>(problem.x_seed.size()) < N)) {
    throw ContractViolation("SeedRollout: seed gains need seed states");
  }
  Trajectory traj;
  traj.x.reserve(N + 1);
  traj.u.reserve(N);
  traj.x.push_back(model.space().Normalize(problem.x0));
  for (int t = 0; t < N; ++t) {
    VectorXd u = problem.u_seed[t];
    if (feedback) {
      u += problem.K_seed[t] *
           model.space().Difference(traj.x[t], problem.x_seed[t]);
    }
    traj.u.push_back(u);
    traj.x.push_back(model.Step(traj.x[t], u, problem.schedule.Contacts(t),
                                problem.schedule.PhaseIndex(t)));
  }
  return traj;
}

ForwardResult ForwardPass(const Problem& problem, const Trajectory& nominal,
                          const Policy& policy, double alpha,
                          SolverMode mode,
                          const std::vector<LinearStep>* steps,
                          const FilterPass* filter) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ContractViolation("ForwardPass: alpha must lie in [0, 1]");
  }
  const Model& model = *problem.model;
  const StateSpace& space = model.space();
  const int N = problem.schedule.horizon();
  const bool replay = mode == SolverMode::kRiskMeasurement;
  if (replay && (steps == nullptr || filter == nullptr)) {
    throw ContractViolation(
        "ForwardPass: measurement mode needs linearizations and a filter");
  }

  ForwardResult out;
  out.traj.x.reserve(N + 1);
  out.traj.u.reserve(N);
  out.traj.x.push_back(space.Normalize(problem.x0));
  Tangent dxhat = space.Difference(out.traj.x[0], nominal.x[0]);
  for (int t = 0; t < N; ++t) {
    const State& x = out.traj.x[t];
    const Tangent dx = space.Difference(x, nominal.x[t]);
    const PolicyStep& p = policy.steps[t];
    const VectorXd du = alpha * p.k + p.K * (replay ? dxhat : dx);
    const VectorXd u = nominal.u[t] + du;
    if (!u.allFinite()) {
      out.diverged = true;
      break;
    }
    out.traj.u.push_back(u);
    State next;
    try {
      next = model.Step(x, u, problem.schedule.Contacts(t),
                        problem.schedule.PhaseIndex(t));
    } catch (const NumericalError&) {
      out.diverged = true;
      break;
    }
    if (!next.allFinite()) {
      out.diverged = true;
      break;
    }
    out.traj.x.push_back(std::move(next));
    if (replay) {
      const LinearStep& s = (*steps)[t];
      const MatrixXd& G = filter->G[t];
      dxhat = s.A * dxhat + s.B * du + G * (s.F * dx - s.F * dxhat);
    }
  }
  if (out.diverged) {
    out.cost = std::numeric_limits<double>::infinity();
    return out;
  }
  out.cost = EvalCost(problem.cost, out.traj.x, out.traj.u);
  if (!std::isfinite(out.cost)) out.diverged = true;
  return out;
}

void SolverConfig::Validate() const {
  if (!(tolerance > 0.0)) {
    throw ContractViolation("SolverConfig: tolerance must be positive");
  }
  if (max_iterations < 1) {
    throw ContractViolation("SolverConfig: max_iterations must be >= 1");
  }
  if (line_search.empty()) {
    throw ContractViolation("SolverConfig: empty line-search schedule");
  }
  for (double a : line_search) {
    if (!(a > 0.0 && a <= 1.0)) {
      throw ContractViolation("SolverConfig: line-search values must lie in (0, 1]");
    }
  }
  if (!(reg_floor >= 0.0)) {
    throw ContractViolation("SolverConfig: regularization floor must be >= 0");
  }
  if (!std::isfinite(sigma)) {
    throw ContractViolation("SolverConfig: sigma must be finite");
  }
}

std::vector<LinearStep> LinearizeTrajectory(const Model& model,
                                            const PhaseSchedule& schedule,
                                            const Trajectory& traj) {
  const int N = schedule.horizon();
  std::vector<LinearStep> steps(N);
  for (int t = 0; t < N; ++t) {
    steps[t] = Linearize(model, traj.x[t], traj.u[t], schedule.Contacts(t),
                         schedule.PhaseIndex(t));
  }
  return steps;
}

namespace {

// Linearization, quadratization and filter along one nominal.
struct Local {
  std::vector<LinearStep> steps;
  std::vector<QuadCost> costs;
  QuadCost terminal;
  std::optional<FilterPass> filter;
  std::vector<AugmentedStep> augmented;
};

Local Approximate(const Problem& problem, const SolverConfig& config,
                  const Trajectory& traj) {
  const Model& model = *problem.model;
  const CostSpec& cost = problem.cost;
  const int N = problem.schedule.horizon();
  Local out;
  out.steps = LinearizeTrajectoryParallel(model, problem.schedule, traj);
  out.costs.resize(N);
  for (int t = 0; t < N; ++t) {
    out.costs[t] = Quadratize(cost, traj.x[t], traj.u[t], t);
  }
  out.terminal = QuadratizeTerminal(cost, traj.x[N]);

  if (config.mode == SolverMode::kRiskMeasurement) {
    std::vector<MatrixXd> gammas(N);
    for (int t = 0; t < N; ++t) {
      gammas[t] = StepMeasurementCovariance(model, problem.schedule,
                                            problem.noise, traj.x[t], t);
    }
    out.filter = RunFilterPass(out.steps, gammas, problem.noise.omega,
                               problem.noise.gamma_fs);
    out.augmented.reserve(N);
    for (int t = 0; t < N; ++t) {
      out.augmented.push_back(BuildAugmented(
          out.steps[t], out.filter->G[t], problem.noise.omega, gammas[t]));
    }
  }
  return out;
}

BackwardResult Backward(const Problem& problem, const SolverConfig& config,
                        const Local& local, double reg, bool feedforward) {
  BackwardOptions options;
  options.reg_floor = reg;
  options.feedforward = feedforward;
  BackwardResult out = BackwardPass(
      local.steps, local.costs, local.terminal, config.sigma, config.mode,
      problem.noise.omega,
      config.mode == SolverMode::kRiskMeasurement ? &local.augmented : nullptr,
      options);
  for (std::size_t t = 0; t < out.policy.steps.size(); ++t) {
    out.policy.steps[t].phase = problem.schedule.PhaseIndex(static_cast<int>(t));
  }
  return out;
}

}  // namespace

SolveResult Solve(const Problem& problem, const SolverConfig& config) {
  config.Validate();
  if (problem.model == nullptr) {
    throw ContractViolation("Solve: problem has no model");
  }
  if (problem.cost.horizon() != problem.schedule.horizon()) {
    throw ContractViolation("Solve: cost horizon differs from schedule");
  }
  if (config.mode != SolverMode::kNeutral &&
      problem.noise.omega.rows() != problem.model->noise_dim()) {
    throw ContractViolation("Solve: process noise covariance has wrong size");
  }

  SolveResult result;
  Trajectory traj = SeedRollout(problem);
  double cost = EvalCost(problem.cost, traj.x, traj.u);
  if (!std::isfinite(cost)) {
    throw NumericalError("Solve: seed rollout is not finite");
  }
  Local local = Approximate(problem, config, traj);
  double reg = config.reg_floor;
  int stalls = 0;
  result.status = SolveStatus::kMaxIterations;
  bool finished = false;

  for (int it = 1; it <= config.max_iterations && !finished; ++it) {
    IterationRecord rec;
    rec.iteration = it;
    rec.cost = cost;
    BackwardResult backward;
    try {
      backward = Backward(problem, config, local, reg, true);
    } catch (const NeuroticBreakdown& e) {
      rec.breakdown = true;
      result.log.push_back(rec);
      result.status = SolveStatus::kBreakdown;
      result.message = e.what();
      break;
    } catch (const RegularizationFailure& e) {
      result.log.push_back(rec);
      result.status = SolveStatus::kNoProgress;
      result.message = e.what();
      break;
    }
    rec.max_feedforward = MaxAbsFeedforward(backward.policy);

    // Nothing left to gain at this nominal.
    if (-backward.ExpectedImprovement(1.0) < config.tolerance) {
      result.log.push_back(rec);
      result.status = SolveStatus::kConverged;
      break;
    }

    bool accepted = false;
    for (double alpha : config.line_search) {
      ForwardResult fp =
          ForwardPass(problem, traj, backward.policy, alpha, config.mode,
                      &local.steps, local.filter ? &*local.filter : nullptr);
      if (fp.diverged || !(fp.cost < cost)) continue;
      Local next;
      try {
        next = Approximate(problem, config, fp.traj);
      } catch (const NumericalError&) {
        continue;
      }
      const double decrease = cost - fp.cost;
      traj = std::move(fp.traj);
      local = std::move(next);
      cost = fp.cost;
      rec.cost = cost;
      rec.alpha = alpha;
      accepted = true;
      if (decrease < config.tolerance) {
        result.status = SolveStatus::kConverged;
        finished = true;
      }
      break;
    }
    result.log.push_back(rec);
    if (accepted) {
      stalls = 0;
      reg = reg / 10.0 < kRegStart ? config.reg_floor
                                   : std::max(config.reg_floor, reg / 10.0);
    } else {
      reg = std::max(kRegStart, 10.0 * reg);
      if (++stalls >= config.max_stalls) {
        result.status = SolveStatus::kNoProgress;
        result.message = "no step accepted in " +
                         std::to_string(config.max_stalls) +
                         " consecutive iterations";
        finished = true;
      }
    }
  }

  result.nominal = traj;
  result.nominal_cost = cost;
  result.cost = cost;
  if (result.status == SolveStatus::kBreakdown) return result;
  // Feedback policy at the final nominal, feedforward zeroed; its value
  // predicts the objective of exactly this policy.
  try {
    BackwardResult final_pass =
        Backward(problem, config, local, config.reg_floor, false);
    result.policy = std::move(final_pass.policy);
    result.cost = final_pass.value[0].s_bar;
    result.value = std::move(final_pass.value);
    result.steps = std::move(local.steps);
    result.filter = std::move(local.filter);
  } catch (const NeuroticBreakdown& e) {
    result.status = SolveStatus::kBreakdown;
    result.message = e.what();
    IterationRecord rec;
    rec.iteration = static_cast<int>(result.log.size()) + 1;
    rec.cost = cost;
    rec.breakdown = true;
    result.log.push_back(rec);
  } catch (const RegularizationFailure& e) {
    result.status = SolveStatus::kNoProgress;
    result.message = e.what();
  }
  return result;
}

void WriteIterationLog(std::ostream& out,
                       const std::vector<IterationRecord>& log) {
  out << "iteration,cost,alpha,max_feedforward,breakdown_flag\n";
  out.precision(17);
  for (const IterationRecord& r : log) {
    out << r.iteration << ',' << r.cost << ',' << r.alpha << ','
        << r.max_feedforward << ',' << (r.breakdown ? 1 : 0) << '\n';
  }
}

}  // namespace rsoc
