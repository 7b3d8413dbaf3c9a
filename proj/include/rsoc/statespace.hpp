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

#ifndef RSOC_STATESPACE_HPP_
#define RSOC_STATESPACE_HPP_

#include <vector>

#include <Eigen/Dense>

namespace rsoc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// A point on the state manifold. Angle entries are kept in (-pi, pi].
using State = VectorXd;
// Local coordinates of a deviation; all solver algebra happens here.
using Tangent = VectorXd;

enum class ComponentKind { kLinear, kAngle };

// Wraps an angle to (-pi, pi].
double WrapAngle(double angle);

// Product of R and SO(2) components, one tangent coordinate each. Layout is
// fixed at construction.
class StateSpace {
 public:
  explicit StateSpace(std::vector<ComponentKind> layout);

  // All-linear space of dimension n.
  static StateSpace Euclidean(int n);

  int tangent_dim() const { return static_cast<int>(layout_.size()); }
  int num_linear() const { return tangent_dim() - num_angles_; }
  int num_angles() const { return num_angles_; }
  ComponentKind kind(int i) const { return layout_[i]; }
  const std::vector<ComponentKind>& layout() const { return layout_; }

  // x (+) dx: linear entries add, angle entries add and wrap.
  State Compose(const State& x, const Tangent& dx) const;
  // x (-) y: shortest-arc difference on angle entries.
  Tangent Difference(const State& x, const State& y) const;
  // Wraps angle entries of a raw coordinate vector.
  State Normalize(const VectorXd& coords) const;

  bool operator==(const StateSpace& other) const {
    return layout_ == other.layout_;
  }

 private:
  void CheckDim(const VectorXd& v, const char* what) const;

  std::vector<ComponentKind> layout_;
  int num_angles_ = 0;
};

struct Gaussian {
  VectorXd mean;
  MatrixXd cov;
};

// N(A mean + b, A cov A^T), covariance symmetrized.
Gaussian TransformGaussian(const MatrixXd& A, const VectorXd& b,
                           const Gaussian& g);

// 0.5 (M + M^T).
MatrixXd Symmetrize(const MatrixXd& M);

// Smallest eigenvalue of the symmetric part of M (0 for empty M).
double MinEigenvalue(const MatrixXd& M);

// Symmetrizes and clips negative eigenvalues to zero.
MatrixXd ClipToPsd(const MatrixXd& M);

// True when M is symmetric within `sym_tol` and eigenvalues >= -eig_tol.
bool IsPsd(const MatrixXd& M, double sym_tol = 1e-12, double eig_tol = 1e-12);

// Block-diagonal concatenation.
MatrixXd BlockDiagonal(const MatrixXd& a, const MatrixXd& b);

}  // namespace rsoc

#endif  // RSOC_STATESPACE_HPP_
