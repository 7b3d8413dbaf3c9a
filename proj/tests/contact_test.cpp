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

#include "rsoc/contact.hpp"

#include <random>

#include <gtest/gtest.h>

#include "rsoc/dynamics.hpp"
#include "rsoc/errors.hpp"

namespace rsoc {
namespace {

MatrixXd Random(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixXd out(r, c);
  for (int i = 0; i < out.size(); ++i) out(i) = n(rng);
  return out;
}

double MaxAbs(const MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

TEST(ContactForceTest, PointMassStatics) {
  const double m = 2.5, g = 9.81;
  const MatrixXd M = m * MatrixXd::Identity(2, 2);
  VectorXd h(2);
  h << 0.0, m * g;
  const VectorXd lambda =
      ResolveContactForces(M, h, MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 2),
                           VectorXd::Zero(2), VectorXd::Zero(2));
  EXPECT_NEAR(lambda[0], 0.0, 1e-14);
  EXPECT_NEAR(lambda[1], m * g, 1e-12);
}

TEST(ContactForceTest, EmptyContactSet) {
  const VectorXd lambda = ResolveContactForces(
      MatrixXd::Identity(3, 3), VectorXd::Ones(3), MatrixXd(0, 3),
      MatrixXd(0, 3), VectorXd::Zero(3), VectorXd::Zero(3));
  EXPECT_EQ(lambda.size(), 0);
}

TEST(ContactForceTest, RandomMonopedStanceResidual) {
  const PlanarChain chain = MonopedChain({});
  const MatrixXd S = ActuationMatrix(chain);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    VectorXd q(4), v(4), tau(2);
    q << u(rng), 0.3 + 0.1 * u(rng), 0.8 * u(rng), -0.3 - 1.5 * std::abs(u(rng));
    for (int i = 0; i < 4; ++i) v[i] = 2.0 * u(rng);
    tau << 5.0 * u(rng), 5.0 * u(rng);
    const auto t = ChainDynamics(chain, q, v);
    const VectorXd tau_full = S.transpose() * tau;
    const VectorXd lambda =
        ResolveContactForces(t.M, t.h, t.J, t.Jdot, v, tau_full, 0);
    const VectorXd vdot =
        t.M.llt().solve(tau_full - t.h + t.J.transpose() * lambda);
    EXPECT_LE(MaxAbs(t.J * vdot + t.Jdot * v), 1e-8);
  }
}

TEST(ContactForceTest, DependentRowsAreSingular) {
  MatrixXd J(2, 2);
  J << 1.0, 0.0, 1.0, 0.0;
  try {
    ResolveContactForces(MatrixXd::Identity(2, 2), VectorXd::Zero(2), J,
                         MatrixXd::Zero(2, 2), VectorXd::Zero(2),
                         VectorXd::Zero(2), 7);
    FAIL() << "expected SingularContact";
  } catch (const SingularContact& e) {
    EXPECT_EQ(e.phase(), 7);
  }
}

TEST(PseudoinverseTest, Examples) {
  EXPECT_TRUE(Pseudoinverse(MatrixXd::Identity(3, 3))
                  .isApprox(MatrixXd::Identity(3, 3)));
  MatrixXd A(1, 2);
  A << 2.0, 0.0;
  const MatrixXd P = Pseudoinverse(A);
  ASSERT_EQ(P.rows(), 2);
  EXPECT_DOUBLE_EQ(P(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(P(1, 0), 0.0);
}

TEST(PseudoinverseTest, PenroseConditions) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    const int r = 1 + trial % 8;
    const int c = r + trial % 9;
    // Every fifth case is rank deficient to exercise the SVD path.
    MatrixXd A = Random(rng, r, c);
    if (trial % 5 == 0 && r > 1) A.row(0) = A.row(1);
    const MatrixXd P = Pseudoinverse(A);
    EXPECT_LE(MaxAbs(A * P * A - A), 1e-9);
    EXPECT_LE(MaxAbs(P * A * P - P), 1e-9);
    EXPECT_LE(MaxAbs((A * P).transpose() - A * P), 1e-9);
    EXPECT_LE(MaxAbs((P * A).transpose() - P * A), 1e-9);
  }
}

TEST(NullspaceProjectorTest, Properties) {
  EXPECT_EQ(NullspaceProjector(MatrixXd(0, 4), 4), MatrixXd::Identity(4, 4));
  EXPECT_LE(MaxAbs(NullspaceProjector(MatrixXd::Identity(3, 3), 3)), 1e-15);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const MatrixXd Ac = Random(rng, 4, 8);
    const MatrixXd P = NullspaceProjector(Ac, 8);
    EXPECT_LE(MaxAbs(Ac * P), 1e-9);
    EXPECT_LE(MaxAbs(P * P - P), 1e-9);
  }
}

TEST(CovarianceProjectionTest, ZeroContactNoiseIsIdentity) {
  const MatrixXd gfs = 5e-3 * MatrixXd::Identity(4, 4);
  SwingMap swing{MatrixXd::Identity(4, 4), MatrixXd(0, 4)};
  EXPECT_EQ(ProjectContactCovariance(gfs, MatrixXd::Zero(4, 4), swing), gfs);
  const MatrixXd gc = 1e-3 * MatrixXd::Identity(4, 4);
  EXPECT_LE(MaxAbs(ProjectContactCovariance(gfs, gc, swing) - (gfs + gc)),
            1e-15);
}

TEST(CovarianceProjectionTest, MonopedLandingNoiseAddsUncertainty) {
  const auto model = MakeMonoped({}, 0.01);
  State x(8);
  x << 0.0, 0.3, 0.3, -0.8, 0.2, -0.5, 0.1, 0.4;
  const FootKinematics foot = model->Foot(x, 0);
  const SwingMap swing = MakeSwingMap({&foot, 1}, {}, 8);
  EXPECT_EQ(swing.A_s.rows(), 4);
  EXPECT_EQ(swing.A_s.topRightCorner(2, 4), MatrixXd::Zero(2, 4));
  const MatrixXd gfs = 5e-3 * MatrixXd::Identity(8, 8);
  VectorXd diag(4);
  diag << 5e-4, 5e-4, 1e-4, 1e-4;
  const MatrixXd gc = diag.asDiagonal();
  const MatrixXd gamma = ProjectContactCovariance(gfs, gc, swing);
  EXPECT_TRUE(IsPsd(gamma));
  EXPECT_GE(MinEigenvalue(gamma - gfs), -1e-12);
  EXPECT_GT((gamma - gfs).norm(), 0.0);
}

TEST(CovarianceProjectionTest, RejectsNonPsd) {
  MatrixXd bad = MatrixXd::Identity(2, 2);
  bad(1, 1) = -1.0;
  SwingMap swing{MatrixXd::Identity(2, 2), MatrixXd(0, 2)};
  EXPECT_THROW(ProjectContactCovariance(bad, MatrixXd::Zero(2, 2), swing),
               ContractViolation);
  EXPECT_THROW(ProjectContactCovariance(MatrixXd::Identity(2, 2), bad, swing),
               ContractViolation);
}

TEST(PhaseScheduleTest, BoundaryBelongsToNewPhase) {
  const PhaseSchedule single = PhaseSchedule::Single(1, {0}, 10);
  for (int t = 0; t < 10; ++t) EXPECT_EQ(single.PhaseIndex(t), 0);

  const PhaseSchedule two(1, {{{0}, 50}, {{}, 30}});
  EXPECT_EQ(two.PhaseIndex(49), 0);
  EXPECT_EQ(two.PhaseIndex(50), 1);
  EXPECT_TRUE(two.IsSwitchStep(50));
  EXPECT_FALSE(two.IsSwitchStep(0));
  EXPECT_THROW(two.Active(80), ContractViolation);
  EXPECT_THROW(two.Active(-1), ContractViolation);
}

TEST(PhaseScheduleTest, HopScheduleAndLandingWindow) {
  const PhaseSchedule hop(1, {{{0}, 10}, {{}, 20}, {{0}, 10}});
  EXPECT_EQ(hop.horizon(), 40);
  const ActivePhase flight = hop.Active(15);
  EXPECT_TRUE(flight.contacts.empty());
  EXPECT_EQ(flight.swing, ContactSet{0});
  EXPECT_EQ(hop.Touchdowns(0), std::vector<int>{30});
  // Swing covers steps 10..29; the final 30% is 24..29.
  EXPECT_FALSE(hop.InLandingWindow(0, 23, 0.3));
  EXPECT_TRUE(hop.InLandingWindow(0, 24, 0.3));
  EXPECT_TRUE(hop.InLandingWindow(0, 29, 0.3));
  EXPECT_FALSE(hop.InLandingWindow(0, 30, 0.3));
  // A swing that never lands has no landing window.
  const PhaseSchedule takeoff(1, {{{0}, 10}, {{}, 10}});
  EXPECT_FALSE(takeoff.InLandingWindow(0, 19, 0.3));
}

TEST(PhaseScheduleTest, RejectsBadPhases) {
  EXPECT_THROW(PhaseSchedule(1, {}), ContractViolation);
  EXPECT_THROW(PhaseSchedule(1, {{{0}, 0}}), ContractViolation);
  EXPECT_THROW(PhaseSchedule(1, {{{1}, 5}}), ContractViolation);
}

}  // namespace
}  // namespace rsoc
