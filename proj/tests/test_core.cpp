// Copyright 2026 The fetchproj Authors
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

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fetchproj/core.hpp"

using namespace fetchproj;

TEST(NormalizeAngle, WrapsIntoHalfOpenInterval)
{
  EXPECT_DOUBLE_EQ(normalize_angle(0.0), 0.0);
  EXPECT_DOUBLE_EQ(normalize_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(normalize_angle(-kPi), kPi);
  EXPECT_NEAR(std::abs(normalize_angle(3 * kPi)), kPi, 1e-12);
  EXPECT_NEAR(normalize_angle(2 * kPi + 0.5), 0.5, 1e-12);
  EXPECT_NEAR(normalize_angle(-2 * kPi - 0.5), -0.5, 1e-12);
}

TEST(NormalizeAngle, RandomAnglesLandInRange)
{
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double a = rng.uniform(-100.0, 100.0);
    const double n = normalize_angle(a);
    EXPECT_GT(n, -kPi);
    EXPECT_LE(n, kPi);
    EXPECT_NEAR(std::remainder(a - n, 2 * kPi), 0.0, 1e-9);
  }
}

TEST(Poses, ConstructorsNormalizeHeadings)
{
  EXPECT_NEAR(make_pose2d(1, 2, 2 * kPi + 1).theta, 1.0, 1e-12);
  EXPECT_NEAR(make_pose3d(1, 2, 3, -2 * kPi - 1).yaw, -1.0, 1e-12);
}

TEST(Poses, Distances)
{
  EXPECT_DOUBLE_EQ(planar_distance(Pose2D{0, 0, 0}, Pose2D{3, 4, 1}), 5.0);
  EXPECT_DOUBLE_EQ(planar_distance(Pose3D{0, 0, 7, 0}, Pose3D{3, 4, 0, 0}), 5.0);
  EXPECT_DOUBLE_EQ(distance3d(Pose3D{0, 0, 0, 0}, Pose3D{2, 3, 6, 0}), 7.0);
}

TEST(Symbols, ArmAndGraspRoundTrip)
{
  for (Arm a : {Arm::left, Arm::right}) {
    EXPECT_EQ(parse_arm(to_string(a)), a);
  }
  for (GraspType g : {GraspType::front, GraspType::back, GraspType::top}) {
    EXPECT_EQ(parse_grasp(to_string(g)), g);
  }
  EXPECT_FALSE(parse_arm("middle"));
  EXPECT_FALSE(parse_grasp("side"));
}

TEST(Rng, SameSeedSameStream)
{
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.next_u64(), b.next_u64());
    EXPECT_EQ(a.uniform(), b.uniform());
    EXPECT_EQ(a.normal(0, 1), b.normal(0, 1));
  }
}

TEST(Rng, DistributionsStayInRange)
{
  Rng rng(9);
  int hits = 0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform(2.0, 3.0);
    EXPECT_GE(u, 2.0);
    EXPECT_LT(u, 3.0);
    EXPECT_LT(rng.index(7), 7u);
    hits += rng.bernoulli(0.25) ? 1 : 0;
  }
  EXPECT_NEAR(hits / 20000.0, 0.25, 0.02);
  EXPECT_FALSE(rng.bernoulli(0.0));
  EXPECT_TRUE(rng.bernoulli(1.0));
}

TEST(Rng, NormalMoments)
{
  Rng rng(5);
  double sum = 0;
  double sq = 0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal(1.0, 2.0);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 1.0, 0.05);
  EXPECT_NEAR(std::sqrt(sq / n - mean * mean), 2.0, 0.05);
}

TEST(DeriveSeed, StableAndDistinct)
{
  EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
  std::set<std::uint64_t> seen;
  for (std::uint64_t m = 0; m < 20; ++m) {
    for (std::uint64_t i = 0; i < 50; ++i) {
      seen.insert(derive_seed(m, i));
    }
  }
  EXPECT_EQ(seen.size(), 1000u);
}
