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

#ifndef RSOC_ERRORS_HPP_
#define RSOC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace rsoc {

// Caller broke a documented precondition (dimension mismatch, out-of-range
// index, non-PSD covariance handed to a PSD-only routine, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical routine could not produce a finite or well-posed result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The Gaussian expectation of the exponential value function does not exist:
// Omega^-1 - sigma C^T S C lost positive definiteness at `step`.
class NeuroticBreakdown : public NumericalError {
 public:
  NeuroticBreakdown(int step, double min_eigenvalue)
      : NumericalError("neurotic breakdown at step " + std::to_string(step) +
                       " (smallest eigenvalue " +
                       std::to_string(min_eigenvalue) + ")"),
        step_(step),
        min_eigenvalue_(min_eigenvalue) {}

  int step() const { return step_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

 private:
  int step_;
  double min_eigenvalue_;
};

// Active contact rows are dependent (J M^-1 J^T ill conditioned).
class SingularContact : public NumericalError {
 public:
  SingularContact(int phase, double condition)
      : NumericalError("singular contact-space inertia in phase " +
                       std::to_string(phase) + " (condition number " +
                       std::to_string(condition) + ")"),
        phase_(phase) {}

  int phase() const { return phase_; }

 private:
  int phase_;
};

// The end-effector Jacobian lost rank; task-space quantities are undefined.
class SingularConfiguration : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Q_uu stayed indefinite after the regularization cap was reached.
class RegularizationFailure : public NumericalError {
 public:
  explicit RegularizationFailure(int step)
      : NumericalError("Q_uu not positive definite at step " +
                       std::to_string(step) + " after maximum regularization"),
        step_(step) {}

  int step() const { return step_; }

 private:
  int step_;
};

}  // namespace rsoc

#endif  // RSOC_ERRORS_HPP_
