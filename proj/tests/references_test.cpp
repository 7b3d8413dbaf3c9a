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

#include "rsoc/references.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "rsoc/errors.hpp"

namespace rsoc {
namespace {

TEST(LineReferenceTest, EndsAtTarget) {
  const Pendulum pendulum({}, 0.02);
  const State x0 = (VectorXd(2) << 0.0, 0.0).finished();
  const State target = (VectorXd(2) << 3.0, 0.0).finished();
  const Reference ref = LineReference(pendulum, x0, target, 10);
  ASSERT_EQ(ref.x.size(), 11u);
  EXPECT_LT(pendulum.space().Difference(ref.x.back(), target).norm(), 1e-12);
  EXPECT_LT(pendulum.space().Difference(ref.x[5], (VectorXd(2) << 1.5, 0.0).finished())
                .norm(),
            1e-12);
  EXPECT_THROW(LineReference(pendulum, x0, target, 0), ContractViolation);
}

TEST(LandingReferenceTest, TouchdownIsStillAndOnTheGround) {
  const auto monoped = MakeMonoped({}, 0.01);
  const LandingSpec spec;
  const Reference ref = LandingReference(*monoped, spec);
  const int nf = static_cast<int>(std::lround(spec.flight_time / 0.01));
  const int N = nf + static_cast<int>(std::lround(spec.stance_time / 0.01));
  ASSERT_EQ(ref.x.size(), static_cast<std::size_t>(N + 1));
  ASSERT_EQ(ref.u.size(), static_cast<std::size_t>(N));
  EXPECT_EQ(ref.K_seed.size(), ref.u.size());

  const FootKinematics touch = monoped->Foot(ref.x[nf], 0);
  EXPECT_NEAR(touch.position.x(), 0.0, 1e-9);
  EXPECT_NEAR(touch.position.y(), 0.0, 1e-9);
  // Foot stays planted through stance.
  for (int k = nf; k <= N; ++k) {
    const FootKinematics f = monoped->Foot(ref.x[k], 0);
    EXPECT_NEAR(f.position.norm(), 0.0, 1e-9) << k;
  }
  // Airborne before touchdown.
  EXPECT_GT(monoped->Foot(ref.x[0], 0).position.y(), 0.05);
}

TEST(LandingReferenceTest, RejectsBadSpecs) {
  const auto monoped = MakeMonoped({}, 0.01);
  LandingSpec spec;
  spec.flight_time = 0.155;  // not a whole number of steps
  EXPECT_THROW(LandingReference(*monoped, spec), ContractViolation);
  spec = LandingSpec{};
  spec.flight_time = 0.5;  // apex beyond the leg's reach
  EXPECT_THROW(spec.Validate(*monoped), ContractViolation);
  spec = LandingSpec{};
  spec.settle_time = 0.0;
  EXPECT_THROW(spec.Validate(*monoped), ContractViolation);
}

}  // namespace
}  // namespace rsoc
