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

// Scalar linear-quadratic problems and brute-force evaluations of the
// exponential cost of a closed-loop policy, shared by unit and acceptance
// tests. Nothing here calls into the solver's risk algebra.

#ifndef RSOC_TESTS_SUPPORT_SCALAR_LQ_HPP_
#define RSOC_TESTS_SUPPORT_SCALAR_LQ_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rsoc/solver.hpp"

namespace rsoc::testing {

struct ScalarLq {
  double a = 1.1;
  double b = 0.5;
  double c = 1.0;
  double omega = 0.5;
  double q = 1.0;
  double r = 0.5;
  double q_terminal = 2.0;
  double x0 = 0.0;
  double x_ref = 1.0;
  double u_ref = 0.0;
  int horizon = 3;
};

// Owns the model the problem points at.
struct ScalarProblem {
  std::unique_ptr<LinearModel> model;
  Problem problem;
};

inline ScalarProblem MakeProblem(const ScalarLq& lq) {
  ScalarProblem out;
  out.model = std::make_unique<LinearModel>(
      MatrixXd::Constant(1, 1, lq.a), MatrixXd::Constant(1, 1, lq.b), 1.0,
      MatrixXd::Constant(1, 1, lq.c));
  const int N = lq.horizon;
  Problem& p = out.problem;
  p.model = out.model.get();
  p.schedule = PhaseSchedule::Single(0, {}, N);
  p.cost = CostSpec::Tracking(
      out.model->space(), MatrixXd::Constant(1, 1, lq.q),
      MatrixXd::Constant(1, 1, lq.r), MatrixXd::Constant(1, 1, lq.q_terminal),
      std::vector<State>(N + 1, VectorXd::Constant(1, lq.x_ref)),
      std::vector<VectorXd>(N, VectorXd::Constant(1, lq.u_ref)));
  p.noise.omega = MatrixXd::Constant(1, 1, lq.omega);
  p.noise.gamma_fs = MatrixXd::Identity(1, 1);
  p.x0 = VectorXd::Constant(1, lq.x0);
  p.u_seed.assign(N, VectorXd::Zero(1));
  return out;
}

// Total cost of one closed-loop realization with whitened noise z:
// w_t = sqrt(omega) z_t, u_t = u_n + K_t (x_t - x_n).
inline double ClosedLoopCost(const ScalarLq& lq, const Trajectory& nominal,
                             const Policy& policy, const double* z) {
  double x = lq.x0;
  double total = 0.0;
  for (int t = 0; t < lq.horizon; ++t) {
    const double u = nominal.u[t][0] +
                     policy.steps[t].K(0, 0) * (x - nominal.x[t][0]);
    total += 0.5 * lq.q * (x - lq.x_ref) * (x - lq.x_ref) +
             0.5 * lq.r * (u - lq.u_ref) * (u - lq.u_ref);
    x = lq.a * x + lq.b * u + lq.c * std::sqrt(lq.omega) * z[t];
  }
  return total + 0.5 * lq.q_terminal * (x - lq.x_ref) * (x - lq.x_ref);
}

// Probabilists' Gauss-Hermite rule (weight = standard normal density) by
// Golub-Welsch.
inline std::pair<VectorXd, VectorXd> GaussHermite(int n) {
  MatrixXd J = MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(double(k));
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(J);
  const VectorXd weights =
      eig.eigenvectors().row(0).transpose().array().square();
  return {eig.eigenvalues(), weights};
}

// Largest eigenvalue of sigma * Hessian of the cost in whitened noise
// coordinates. The cost is quadratic in z, so unit second differences are
// exact.
inline double CurvatureBound(const ScalarLq& lq, const Trajectory& nominal,
                             const Policy& policy, double sigma) {
  const int N = lq.horizon;
  std::vector<double> z(N, 0.0);
  const double base = ClosedLoopCost(lq, nominal, policy, z.data());
  MatrixXd H(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = i; j < N; ++j) {
      auto at = [&](int a, int b) {
        std::fill(z.begin(), z.end(), 0.0);
        if (a >= 0) z[a] += 1.0;
        if (b >= 0) z[b] += 1.0;
        return ClosedLoopCost(lq, nominal, policy, z.data());
      };
      H(i, j) = H(j, i) = at(i, j) - at(i, -1) - at(j, -1) + base;
    }
  }
  return Eigen::SelfAdjointEigenSolver<MatrixXd>(sigma * H)
      .eigenvalues()
      .maxCoeff();
}

// (1/sigma) log E[exp(sigma L)] by tensor Gauss-Hermite quadrature. For
// sigma > 0 the nodes are stretched so the integrand decays against the
// rule's weight even near breakdown.
inline double RiskCostQuadrature(const ScalarLq& lq, const Trajectory& nominal,
                                 const Policy& policy, double sigma,
                                 int nodes) {
  const int N = lq.horizon;
  const double lam = CurvatureBound(lq, nominal, policy, sigma);
  const double s2 = lam > 0.0 ? 2.0 / (1.0 - lam) : 1.0;
  const double s = std::sqrt(s2);
  const auto [x, w] = GaussHermite(nodes);
  std::vector<int> idx(N, 0);
  std::vector<double> z(N);
  // Accumulate in log space around the first term to avoid overflow.
  double shift = 0.0;
  double acc = 0.0;
  bool first = true;
  for (;;) {
    double log_weight = 0.0;
    for (int d = 0; d < N; ++d) {
      z[d] = s * x[idx[d]];
      // w_i * s * phi(s x) / phi(x)
      log_weight += std::log(w[idx[d]] * s) - 0.5 * (s2 - 1.0) * x[idx[d]] * x[idx[d]];
    }
    const double term = log_weight + sigma * ClosedLoopCost(lq, nominal, policy, z.data());
    if (first) {
      shift = term;
      first = false;
    }
    acc += std::exp(term - shift);
    int d = 0;
    while (d < N && ++idx[d] == nodes) idx[d++] = 0;
    if (d == N) break;
  }
  return (shift + std::log(acc)) / sigma;
}

struct MonteCarloEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

// Sample estimate of (1/sigma) log E[exp(sigma L)]. Noise is drawn from a
// widened Gaussian and reweighted when the curvature bound makes the plain
// estimator's variance infinite.
inline MonteCarloEstimate RiskCostMonteCarlo(const ScalarLq& lq,
                                             const Trajectory& nominal,
                                             const Policy& policy, double sigma,
                                             int samples, std::uint64_t seed) {
  const int N = lq.horizon;
  const double lam = CurvatureBound(lq, nominal, policy, sigma);
  const double s2 = 2.0 * lam < 0.5 ? 1.0 : 1.0 / (1.0 - lam);
  const double s = std::sqrt(s2);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> z(N), terms(samples);
  for (int i = 0; i < samples; ++i) {
    double log_ratio = 0.0;
    for (int d = 0; d < N; ++d) {
      const double g = gauss(rng);
      z[d] = s * g;
      log_ratio += std::log(s) - 0.5 * (s2 - 1.0) * g * g;
    }
    terms[i] = log_ratio + sigma * ClosedLoopCost(lq, nominal, policy, z.data());
  }
  const double shift = *std::max_element(terms.begin(), terms.end());
  double mean = 0.0, sq = 0.0;
  for (double t : terms) {
    const double e = std::exp(t - shift);
    mean += e;
    sq += e * e;
  }
  mean /= samples;
  const double var = std::max(0.0, sq / samples - mean * mean);
  MonteCarloEstimate out;
  out.value = (shift + std::log(mean)) / sigma;
  out.standard_error = std::sqrt(var / samples) / (mean * std::abs(sigma));
  return out;
}

// Smallest sigma > 0 at which the backward recursion breaks down, by
// bisection on the solver's own breakdown signal.
inline double BreakdownSigma(const ScalarLq& lq, double tol = 1e-12) {
  ScalarProblem sp = MakeProblem(lq);
  auto breaks = [&](double sigma) {
    SolverConfig config;
    config.mode = SolverMode::kRiskProcess;
    config.sigma = sigma;
    return Solve(sp.problem, config).status == SolveStatus::kBreakdown;
  };
  double lo = 0.0, hi = 1.0;
  while (!breaks(hi)) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (breaks(mid) ? hi : lo) = mid;
  }
  return lo;
}

}  // namespace rsoc::testing

#endif  // RSOC_TESTS_SUPPORT_SCALAR_LQ_HPP_
