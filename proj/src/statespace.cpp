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

#include "rsoc/statespace.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rsoc/errors.hpp"

namespace rsoc {

double WrapAngle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double r = std::remainder(angle, kTwoPi);
  if (r <= -std::numbers::pi) r += kTwoPi;
  return r;
}

StateSpace::StateSpace(std::vector<ComponentKind> layout)
    : layout_(std::move(layout)) {
  if (layout_.empty()) {
    throw ContractViolation("StateSpace: tangent dimension must be >= 1");
  }
  for (ComponentKind k : layout_) {
    if (k == ComponentKind::kAngle) ++num_angles_;
  }
}

StateSpace StateSpace::Euclidean(int n) {
  if (n < 1) throw ContractViolation("StateSpace: dimension must be >= 1");
  return StateSpace(std::vector<ComponentKind>(n, ComponentKind::kLinear));
}

void StateSpace::CheckDim(const VectorXd& v, const char* what) const {
  if (v.size() != tangent_dim()) {
    throw ContractViolation(std::string("StateSpace: ") + what + " has size " +
                            std::to_string(v.size()) + ", expected " +
                            std::to_string(tangent_dim()));
  }
}

State StateSpace::Compose(const State& x, const Tangent& dx) const {
  CheckDim(x, "state");
  CheckDim(dx, "tangent");
  State out = x + dx;
  if (num_angles_ > 0) {
    for (int i = 0; i < tangent_dim(); ++i) {
      if (layout_[i] == ComponentKind::kAngle) out[i] = WrapAngle(out[i]);
    }
  }
  return out;
}

Tangent StateSpace::Difference(const State& x, const State& y) const {
  CheckDim(x, "state");
  CheckDim(y, "state");
  Tangent out = x - y;
  if (num_angles_ > 0) {
    for (int i = 0; i < tangent_dim(); ++i) {
      if (layout_[i] == ComponentKind::kAngle) out[i] = WrapAngle(out[i]);
    }
  }
  return out;
}

State StateSpace::Normalize(const VectorXd& coords) const {
  CheckDim(coords, "state");
  State out = coords;
  for (int i = 0; i < tangent_dim(); ++i) {
    if (layout_[i] == ComponentKind::kAngle) out[i] = WrapAngle(out[i]);
  }
  return out;
}

Gaussian TransformGaussian(const MatrixXd& A, const VectorXd& b,
                           const Gaussian& g) {
  if (A.cols() != g.mean.size() || g.cov.rows() != g.mean.size() ||
      g.cov.cols() != g.mean.size() || b.size() != A.rows()) {
    throw ContractViolation("TransformGaussian: dimension mismatch");
  }
  return {A * g.mean + b, Symmetrize(A * g.cov * A.transpose())};
}

MatrixXd Symmetrize(const MatrixXd& M) {
  return 0.5 * (M + M.transpose());
}

double MinEigenvalue(const MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(Symmetrize(M),
                                              Eigen::EigenvaluesOnly);
  return eig.eigenvalues()(0);
}

MatrixXd ClipToPsd(const MatrixXd& M) {
  MatrixXd sym = Symmetrize(M);
  if (sym.size() == 0) return sym;
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym);
  if (eig.eigenvalues()(0) >= 0.0) return sym;
  VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
  return Symmetrize(eig.eigenvectors() * clipped.asDiagonal() *
                    eig.eigenvectors().transpose());
}

bool IsPsd(const MatrixXd& M, double sym_tol, double eig_tol) {
  if (M.rows() != M.cols()) return false;
  if (M.size() == 0) return true;
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > sym_tol) return false;
  return MinEigenvalue(M) >= -eig_tol;
}

MatrixXd BlockDiagonal(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out = MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

}  // namespace rsoc
