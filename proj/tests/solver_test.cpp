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

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "rsoc/errors.hpp"
#include "support/scalar_lq.hpp"

namespace rsoc {
namespace {

using testing::MakeProblem;
using testing::ScalarLq;

MatrixXd Random(std::mt19937_64& rng, int r, int c, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  MatrixXd out(r, c);
  for (int i = 0; i < out.size(); ++i) out(i) = n(rng);
  return out;
}

MatrixXd RandomSpd(std::mt19937_64& rng, int n, double floor) {
  const MatrixXd L = Random(rng, n, n);
  return L * L.transpose() / n + floor * MatrixXd::Identity(n, n);
}

double MaxAbs(const MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

ValueQuadratic Scalar(double S, double s, double s_bar) {
  return {MatrixXd::Constant(1, 1, S), VectorXd::Constant(1, s), s_bar};
}

// Adaptive Simpson on [a, b].
template <typename F>
double Simpson(const F& f, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol) {
    return left + right + (left + right - whole) / 15.0;
  }
  return Simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         Simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double Integrate(const F& f, double a, double b, double tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  return Simpson(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol,
                 50);
}

TEST(RiskCompletionTest, ZeroSigmaIsTheExpectedValue) {
  std::mt19937_64 rng(1);
  const ValueQuadratic V{RandomSpd(rng, 3, 0.1), Random(rng, 3, 1), 0.7};
  const MatrixXd C = Random(rng, 3, 2), omega = RandomSpd(rng, 2, 0.1);
  const RiskExpectation E = RiskCompletion(V, C, omega, 0.0);
  EXPECT_EQ(E.M, V.S);
  EXPECT_EQ(E.m_vec, V.s);
  EXPECT_NEAR(E.c_bar, 0.7 + 0.5 * (C.transpose() * V.S * C * omega).trace(),
              1e-14);
}

TEST(RiskCompletionTest, ScalarInflation) {
  // S = 1, Omega = 1, sigma = 0.5: M = 1 / (1 - 0.5) = 2.
  const MatrixXd one = MatrixXd::Identity(1, 1);
  const RiskExpectation E = RiskCompletion(Scalar(1.0, 0.0, 0.0), one, one, 0.5);
  EXPECT_NEAR(E.M(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(RiskInflatedHessian(one, one, one, 0.5)(0, 0), 2.0, 1e-15);
}

TEST(RiskCompletionTest, MatchesInflatedHessian) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd S = RandomSpd(rng, 4, 0.2), C = Random(rng, 4, 3);
    const MatrixXd omega = RandomSpd(rng, 3, 0.1);
    for (double sigma : {-2.0, -0.1, 0.05}) {
      ValueQuadratic V{S, VectorXd::Zero(4), 0.0};
      RiskExpectation E;
      try {
        E = RiskCompletion(V, C, omega, sigma);
      } catch (const NeuroticBreakdown&) {
        continue;
      }
      const MatrixXd ref = RiskInflatedHessian(S, C, omega, sigma);
      EXPECT_LE(MaxAbs(E.M - ref), 1e-9 * std::max(1.0, MaxAbs(ref)));
    }
  }
}

// Oracle: one-dimensional quadrature of E[exp(sigma psi(m + w))].
TEST(RiskCompletionTest, MatchesQuadrature) {
  const double S = 1.2, s = 0.3, s_bar = 0.1, omega = 0.8, m = 0.4;
  const MatrixXd one = MatrixXd::Identity(1, 1);
  for (double sigma : {-0.5, 0.3}) {
    const RiskExpectation E = RiskCompletion(
        Scalar(S, s, s_bar), one, MatrixXd::Constant(1, 1, omega), sigma);
    const double predicted =
        0.5 * E.M(0, 0) * m * m + E.m_vec[0] * m + E.c_bar;
    auto integrand = [&](double w) {
      const double y = m + w;
      const double psi = 0.5 * S * y * y + s * y + s_bar;
      return std::exp(-0.5 * w * w / omega + sigma * psi) /
             std::sqrt(2.0 * M_PI * omega);
    };
    const double bound = 40.0 * std::sqrt(omega);
    const double oracle =
        std::log(Integrate(integrand, -bound, bound, 1e-14)) / sigma;
    EXPECT_NEAR(predicted, oracle, 1e-9) << "sigma " << sigma;
  }
}

TEST(RiskCompletionTest, BreakdownAtScalarBoundary) {
  const double S = 1.5, omega = 0.4;
  const double boundary = 1.0 / (S * omega);
  const MatrixXd one = MatrixXd::Identity(1, 1);
  const MatrixXd W = MatrixXd::Constant(1, 1, omega);
  auto breaks = [&](double sigma) {
    try {
      RiskCompletion(Scalar(S, 0.0, 0.0), one, W, sigma, 7);
      return false;
    } catch (const NeuroticBreakdown& e) {
      EXPECT_EQ(e.step(), 7);
      EXPECT_LE(e.min_eigenvalue(), 0.0);
      return true;
    }
  };
  double lo = 0.0, hi = 10.0;
  ASSERT_TRUE(breaks(hi));
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    (breaks(mid) ? hi : lo) = mid;
  }
  EXPECT_NEAR(hi, boundary, 1e-9);
  EXPECT_FALSE(breaks(-100.0));
}

TEST(RiskCompletionTest, BreakdownIffInformationMatrixIndefinite) {
  std::mt19937_64 rng(3);
  int broke = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const MatrixXd S = RandomSpd(rng, 3, 0.05), C = Random(rng, 3, 2);
    const MatrixXd omega = RandomSpd(rng, 2, 0.05);
    const double sigma = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
    const MatrixXd info =
        omega.inverse() - sigma * C.transpose() * S * C;
    const bool indefinite = MinEigenvalue(Symmetrize(info)) <= 0.0;
    bool threw = false;
    try {
      RiskCompletion({S, VectorXd::Zero(3), 0.0}, C, omega, sigma);
    } catch (const NeuroticBreakdown&) {
      threw = true;
    }
    EXPECT_EQ(threw, indefinite);
    broke += threw;
  }
  EXPECT_GT(broke, 10);
  EXPECT_LT(broke, 190);
}

struct LqSteps {
  std::vector<LinearStep> steps;
  std::vector<QuadCost> costs;
  QuadCost terminal;
};

LqSteps RandomLq(std::mt19937_64& rng, int n, int m, int N) {
  LqSteps out;
  for (int t = 0; t < N; ++t) {
    out.steps.push_back({MatrixXd::Identity(n, n) + Random(rng, n, n, 0.2),
                         Random(rng, n, m), Random(rng, n, n, 0.3),
                         MatrixXd::Identity(n, n), MatrixXd::Identity(n, n)});
    QuadCost c;
    c.Q = RandomSpd(rng, n, 0.1);
    c.q = Random(rng, n, 1);
    c.R = RandomSpd(rng, m, 0.1);
    c.r = Random(rng, m, 1);
    c.P = MatrixXd::Zero(m, n);
    c.c0 = 0.3;
    out.costs.push_back(c);
  }
  out.terminal.Q = RandomSpd(rng, n, 0.1);
  out.terminal.q = Random(rng, n, 1);
  out.terminal.c0 = 0.1;
  return out;
}

TEST(BackwardPassTest, ScalarRiccatiReachesGoldenRatio) {
  const int N = 200;
  const MatrixXd one = MatrixXd::Identity(1, 1);
  std::vector<LinearStep> steps(N, LinearStep{one, one, one, one, one});
  QuadCost c{one, VectorXd::Zero(1), one, VectorXd::Zero(1),
             MatrixXd::Zero(1, 1), 0.0};
  const BackwardResult br = BackwardPass(steps, std::vector<QuadCost>(N, c), c,
                                         0.0, SolverMode::kNeutral, one);
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  EXPECT_NEAR(br.value[0].S(0, 0), phi, 1e-12);
  EXPECT_NEAR(br.policy.steps[0].K(0, 0), -1.0 / phi, 1e-12);
}

TEST(BackwardPassTest, SigmaZeroRecoversNeutralGains) {
  std::mt19937_64 rng(4);
  const LqSteps lq = RandomLq(rng, 4, 2, 30);
  const MatrixXd omega = RandomSpd(rng, 4, 0.1);
  const BackwardResult neutral = BackwardPass(lq.steps, lq.costs, lq.terminal,
                                              0.0, SolverMode::kNeutral, omega);
  const BackwardResult risk = BackwardPass(lq.steps, lq.costs, lq.terminal, 0.0,
                                           SolverMode::kRiskProcess, omega);
  for (int t = 0; t < 30; ++t) {
    EXPECT_LE(MaxAbs(neutral.policy.steps[t].K - risk.policy.steps[t].K), 1e-12);
    EXPECT_LE(MaxAbs(neutral.policy.steps[t].k - risk.policy.steps[t].k), 1e-12);
  }
  // The constant absorbs the expected noise cost.
  EXPECT_GT(risk.value[0].s_bar, neutral.value[0].s_bar);
}

TEST(BackwardPassTest, NoNoiseMeansNoRisk) {
  std::mt19937_64 rng(5);
  const LqSteps lq = RandomLq(rng, 3, 2, 20);
  const MatrixXd zero = MatrixXd::Zero(3, 3);
  const BackwardResult neutral = BackwardPass(lq.steps, lq.costs, lq.terminal,
                                              0.0, SolverMode::kNeutral, zero);
  const BackwardResult risk = BackwardPass(lq.steps, lq.costs, lq.terminal, 0.7,
                                           SolverMode::kRiskProcess, zero);
  for (int t = 0; t < 20; ++t) {
    EXPECT_LE(MaxAbs(neutral.policy.steps[t].K - risk.policy.steps[t].K), 1e-12);
    EXPECT_LE(MaxAbs(neutral.policy.steps[t].k - risk.policy.steps[t].k), 1e-12);
  }
  EXPECT_NEAR(neutral.value[0].s_bar, risk.value[0].s_bar, 1e-10);
}

TEST(BackwardPassTest, RiskAversionStiffensFeedback) {
  std::mt19937_64 rng(6);
  const LqSteps lq = RandomLq(rng, 3, 2, 20);
  const MatrixXd omega = 0.05 * MatrixXd::Identity(3, 3);
  const BackwardResult neutral = BackwardPass(lq.steps, lq.costs, lq.terminal,
                                              0.0, SolverMode::kNeutral, omega);
  const BackwardResult averse = BackwardPass(lq.steps, lq.costs, lq.terminal,
                                             0.5, SolverMode::kRiskProcess, omega);
  EXPECT_GT(MaxAbs(averse.policy.steps[0].K - neutral.policy.steps[0].K), 1e-6);
  EXPECT_GT(averse.value[0].s_bar, neutral.value[0].s_bar);
}

// With a blind, noiseless estimator that starts on the plant state, the
// estimate never leaves the plant, so the measurement-aware policy must
// coincide with the neutral one.
TEST(BackwardPassTest, DecoupledAugmentationRecoversNeutral) {
  std::mt19937_64 rng(7);
  const int n = 3, N = 25;
  const LqSteps lq = RandomLq(rng, n, 2, N);
  const MatrixXd zero = MatrixXd::Zero(n, n);
  std::vector<AugmentedStep> aug;
  for (const LinearStep& s : lq.steps) {
    aug.push_back(BuildAugmented(s, zero, zero, zero));
  }
  const BackwardResult neutral = BackwardPass(lq.steps, lq.costs, lq.terminal,
                                              0.0, SolverMode::kNeutral, zero);
  const BackwardResult meas =
      BackwardPass(lq.steps, lq.costs, lq.terminal, 0.5,
                   SolverMode::kRiskMeasurement, zero, &aug);
  for (int t = 0; t < N; ++t) {
    const PolicyStep& a = neutral.policy.steps[t];
    const PolicyStep& b = meas.policy.steps[t];
    EXPECT_LE(MaxAbs(a.K - b.K), 1e-9);
    EXPECT_LE(MaxAbs(a.k - b.k), 1e-9);
    EXPECT_LE(MaxAbs(b.K - (b.Kx + b.Kxhat)), 1e-15);
  }
}

TEST(BackwardPassTest, MeasurementModeNeedsAugmentation) {
  std::mt19937_64 rng(8);
  const LqSteps lq = RandomLq(rng, 2, 1, 3);
  EXPECT_THROW(BackwardPass(lq.steps, lq.costs, lq.terminal, 1.0,
                            SolverMode::kRiskMeasurement,
                            MatrixXd::Identity(2, 2)),
               ContractViolation);
}

TEST(BackwardPassTest, EvaluationKeepsFeedbackAndDropsFeedforward) {
  std::mt19937_64 rng(9);
  const LqSteps lq = RandomLq(rng, 3, 2, 10);
  const MatrixXd omega = 0.1 * MatrixXd::Identity(3, 3);
  BackwardOptions eval;
  eval.feedforward = false;
  const BackwardResult opt = BackwardPass(lq.steps, lq.costs, lq.terminal, 0.3,
                                          SolverMode::kRiskProcess, omega);
  const BackwardResult ev = BackwardPass(lq.steps, lq.costs, lq.terminal, 0.3,
                                         SolverMode::kRiskProcess, omega,
                                         nullptr, eval);
  for (int t = 0; t < 10; ++t) {
    EXPECT_EQ(ev.policy.steps[t].k.norm(), 0.0);
    EXPECT_EQ(ev.policy.steps[t].K, opt.policy.steps[t].K);
  }
  EXPECT_EQ(ev.d1, 0.0);
  // The optimized feedforward can only lower the predicted cost.
  EXPECT_LE(opt.value[0].s_bar, ev.value[0].s_bar + 1e-12);
}

TEST(ForwardPassTest, ZeroStepReplaysNominal) {
  const ScalarLq lq;
  const auto sp = MakeProblem(lq);
  const Trajectory nominal = SeedRollout(sp.problem);
  Policy policy;
  policy.steps.assign(lq.horizon, PolicyStep{VectorXd::Constant(1, 3.0),
                                             MatrixXd::Constant(1, 1, -0.4),
                                             {}, {}, 0});
  const ForwardResult fp = ForwardPass(sp.problem, nominal, policy, 0.0);
  ASSERT_FALSE(fp.diverged);
  for (int t = 0; t <= lq.horizon; ++t) EXPECT_EQ(fp.traj.x[t], nominal.x[t]);
  EXPECT_EQ(fp.cost, EvalCost(sp.problem.cost, nominal.x, nominal.u));
}

TEST(ForwardPassTest, AppliesAffinePolicy) {
  ScalarLq lq;
  lq.x0 = 0.5;
  auto sp = MakeProblem(lq);
  Trajectory nominal = SeedRollout(sp.problem);
  for (State& x : nominal.x) x[0] += 0.1;  // pretend the nominal is offset
  Policy policy;
  for (int t = 0; t < lq.horizon; ++t) {
    policy.steps.push_back({VectorXd::Constant(1, 0.2 * t),
                            MatrixXd::Constant(1, 1, -0.3 - 0.1 * t), {}, {}, 0});
  }
  const ForwardResult fp = ForwardPass(sp.problem, nominal, policy, 0.5);
  double x = lq.x0;
  for (int t = 0; t < lq.horizon; ++t) {
    const double u = nominal.u[t][0] + 0.5 * 0.2 * t +
                     (-0.3 - 0.1 * t) * (x - nominal.x[t][0]);
    EXPECT_NEAR(fp.traj.u[t][0], u, 1e-14);
    x = lq.a * x + lq.b * u;
    EXPECT_NEAR(fp.traj.x[t + 1][0], x, 1e-14);
  }
}

TEST(ForwardPassTest, HugeGainDiverges) {
  ScalarLq lq;
  lq.horizon = 200;
  lq.x0 = 1.0;
  auto sp = MakeProblem(lq);
  Trajectory nominal = SeedRollout(sp.problem);
  for (State& x : nominal.x) x[0] = 0.0;
  Policy policy;
  policy.steps.assign(200, PolicyStep{VectorXd::Zero(1),
                                      MatrixXd::Constant(1, 1, 1e10), {}, {}, 0});
  const ForwardResult fp = ForwardPass(sp.problem, nominal, policy, 1.0);
  EXPECT_TRUE(fp.diverged);
  EXPECT_TRUE(std::isinf(fp.cost));
  EXPECT_THROW(ForwardPass(sp.problem, nominal, policy, 1.5), ContractViolation);
}

TEST(SolveTest, LinearQuadraticConvergesInOneStep) {
  const auto sp = MakeProblem(ScalarLq{});
  SolverConfig config;
  const SolveResult r = Solve(sp.problem, config);
  EXPECT_EQ(r.status, SolveStatus::kConverged);
  ASSERT_GE(r.log.size(), 1u);
  EXPECT_EQ(r.log[0].alpha, 1.0);
  EXPECT_LE(r.log.size(), 3u);
  // A second solve from the solution has nothing left to do.
  Problem again = sp.problem;
  again.u_seed = r.nominal.u;
  const SolveResult r2 = Solve(again, config);
  EXPECT_EQ(r2.log.size(), 1u);
  EXPECT_NEAR(r2.cost, r.cost, 1e-12);
}

TEST(SolveTest, PredictedRiskCostMatchesQuadrature) {
  const ScalarLq lq;
  const auto sp = MakeProblem(lq);
  for (double sigma : {-0.5, 0.3}) {
    SolverConfig config;
    config.mode = SolverMode::kRiskProcess;
    config.sigma = sigma;
    config.tolerance = 1e-12;
    const SolveResult r = Solve(sp.problem, config);
    ASSERT_EQ(r.status, SolveStatus::kConverged);
    const double oracle =
        testing::RiskCostQuadrature(lq, r.nominal, r.policy, sigma, 40);
    EXPECT_NEAR(r.cost, oracle, 1e-6 * std::abs(oracle)) << "sigma " << sigma;
    const auto mc = testing::RiskCostMonteCarlo(lq, r.nominal, r.policy, sigma,
                                                100000, 17);
    EXPECT_LE(std::abs(mc.value - r.cost), 3.0 * mc.standard_error);
  }
}

TEST(SolveTest, BreakdownIsReportedNotThrown) {
  ScalarLq lq;
  lq.omega = 5.0;
  const auto sp = MakeProblem(lq);
  SolverConfig config;
  config.mode = SolverMode::kRiskProcess;
  config.sigma = 10.0;
  const SolveResult r = Solve(sp.problem, config);
  EXPECT_EQ(r.status, SolveStatus::kBreakdown);
  ASSERT_FALSE(r.log.empty());
  EXPECT_TRUE(r.log.back().breakdown);
  EXPECT_FALSE(r.message.empty());
}

TEST(SolveTest, PendulumCostDecreasesMonotonically) {
  const Pendulum model(PendulumParams{}, 0.02);
  const int N = 60;
  Problem p;
  p.model = &model;
  p.schedule = PhaseSchedule::Single(0, {}, N);
  p.cost = CostSpec::Tracking(
      model.space(), Eigen::Vector2d(1.0, 0.1).asDiagonal().toDenseMatrix(),
      0.01 * MatrixXd::Identity(1, 1),
      Eigen::Vector2d(100.0, 10.0).asDiagonal().toDenseMatrix(),
      std::vector<State>(N + 1, Eigen::Vector2d(2.0, 0.0)),
      std::vector<VectorXd>(N, VectorXd::Zero(1)));
  p.x0 = Eigen::Vector2d(0.0, 0.0);
  p.u_seed.assign(N, VectorXd::Zero(1));
  p.noise.omega = 1e-4 * MatrixXd::Identity(2, 2);
  for (SolverMode mode : {SolverMode::kNeutral, SolverMode::kRiskProcess}) {
    SolverConfig config;
    config.mode = mode;
    config.sigma = mode == SolverMode::kNeutral ? 0.0 : 1.0;
    // The risk fixed point trades deterministic cost for robustness, so the
    // last feedforward steps cannot lower the rollout cost.
    if (mode != SolverMode::kNeutral) config.tolerance = 1e-2;
    const SolveResult r = Solve(p, config);
    EXPECT_EQ(r.status, SolveStatus::kConverged) << SolverModeName(mode);
    const double seed_cost = EvalCost(p.cost, SeedRollout(p).x, p.u_seed);
    EXPECT_LT(r.nominal_cost, 0.25 * seed_cost);
    for (std::size_t i = 1; i < r.log.size(); ++i) {
      EXPECT_LE(r.log[i].cost, r.log[i - 1].cost);
    }
    EXPECT_NEAR(r.nominal.x[N][0], 2.0, 0.05);
    ASSERT_EQ(r.policy.steps.size(), static_cast<std::size_t>(N));
    for (const PolicyStep& s : r.policy.steps) EXPECT_EQ(s.k.norm(), 0.0);
  }
}

// A dynamically feasible reference with x0 on it is a fixed point for any
// sigma: every feedforward vanishes, only the feedback changes.
TEST(SolveTest, FeasibleReferenceIsSharedAcrossSigma) {
  const Pendulum model(PendulumParams{}, 0.02);
  const int N = 40;
  Problem p;
  p.model = &model;
  p.schedule = PhaseSchedule::Single(0, {}, N);
  p.x0 = Eigen::Vector2d(0.3, 0.0);
  for (int t = 0; t < N; ++t) {
    p.u_seed.push_back(VectorXd::Constant(1, 2.0 * std::sin(0.2 * t)));
  }
  const Trajectory ref = SeedRollout(p);
  p.cost = CostSpec::Tracking(model.space(), MatrixXd::Identity(2, 2),
                              0.1 * MatrixXd::Identity(1, 1),
                              10.0 * MatrixXd::Identity(2, 2), ref.x, ref.u);
  p.noise.omega = 1e-5 * MatrixXd::Identity(2, 2);

  SolverConfig neutral;
  SolverConfig risk;
  risk.mode = SolverMode::kRiskProcess;
  risk.sigma = 10.0;
  const SolveResult a = Solve(p, neutral);
  const SolveResult b = Solve(p, risk);
  ASSERT_EQ(a.status, SolveStatus::kConverged);
  ASSERT_EQ(b.status, SolveStatus::kConverged);
  EXPECT_LE(a.log[0].max_feedforward, 1e-12);
  EXPECT_LE(b.log[0].max_feedforward, 1e-12);
  double gain_gap = 0.0;
  for (int t = 0; t < N; ++t) {
    EXPECT_EQ(a.nominal.u[t], b.nominal.u[t]);
    gain_gap = std::max(gain_gap,
                        MaxAbs(a.policy.steps[t].K - b.policy.steps[t].K));
  }
  EXPECT_GT(gain_gap, 1e-4);
}

TEST(SolveTest, DoubleIntegratorFeedforwardIndependentOfSigma) {
  const LinearModel model = LinearModel::DoubleIntegrator(0.05);
  const int N = 40;
  Problem p;
  p.model = &model;
  p.schedule = PhaseSchedule::Single(0, {}, N);
  p.x0 = Eigen::Vector2d(0.0, 0.0);
  std::vector<VectorXd> u_ref;
  for (int t = 0; t < N; ++t) {
    u_ref.push_back(VectorXd::Constant(1, t < N / 2 ? 1.0 : -1.0));
  }
  p.u_seed = u_ref;
  const Trajectory ref = SeedRollout(p);
  p.cost = CostSpec::Tracking(model.space(), MatrixXd::Identity(2, 2),
                              0.1 * MatrixXd::Identity(1, 1),
                              10.0 * MatrixXd::Identity(2, 2), ref.x, u_ref);
  p.noise.omega = 1e-4 * MatrixXd::Identity(2, 2);
  // Start away from the reference controls so both solvers must move.
  for (int t = 0; t < N; ++t) p.u_seed[t] = VectorXd::Zero(1);

  SolverConfig neutral;
  neutral.tolerance = 1e-14;
  SolverConfig risk = neutral;
  risk.mode = SolverMode::kRiskProcess;
  risk.sigma = 10.0;
  const SolveResult a = Solve(p, neutral);
  const SolveResult b = Solve(p, risk);
  ASSERT_EQ(a.status, SolveStatus::kConverged);
  ASSERT_EQ(b.status, SolveStatus::kConverged);
  for (int t = 0; t < N; ++t) {
    EXPECT_NEAR(a.nominal.u[t][0], b.nominal.u[t][0], 1e-8);
  }
}

TEST(SolveTest, ConfigValidation) {
  SolverConfig bad;
  bad.tolerance = 0.0;
  EXPECT_THROW(bad.Validate(), ContractViolation);
  bad = {};
  bad.line_search = {1.0, 1.5};
  EXPECT_THROW(bad.Validate(), ContractViolation);
  EXPECT_EQ(ParseSolverMode("risk-meas"), SolverMode::kRiskMeasurement);
  for (SolverMode m : {SolverMode::kNeutral, SolverMode::kRiskProcess,
                       SolverMode::kRiskMeasurement}) {
    EXPECT_EQ(ParseSolverMode(SolverModeName(m)), m);
  }
  EXPECT_THROW(ParseSolverMode("lqg"), ContractViolation);
}

TEST(SolveTest, IterationLogFormat) {
  std::ostringstream out;
  WriteIterationLog(out, {{1, 2.5, 1.0, 0.25, false}, {2, 2.0, 0.0, 0.0, true}});
  EXPECT_EQ(out.str(),
            "iteration,cost,alpha,max_feedforward,breakdown_flag\n"
            "1,2.5,1,0.25,0\n2,2,0,0,1\n");
}

}  // namespace
}  // namespace rsoc
