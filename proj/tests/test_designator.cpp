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

#include "fetchproj/designator.hpp"

using namespace fetchproj;
using namespace fetchproj::designator;

namespace
{

Description pick_description()
{
  return make_description(Kind::action, Quantifier::an, {prop("type", sym("picking-up"))});
}

geom::WorldState empty_world()
{
  geom::RobotState robot;
  robot.base = Pose2D{3.0, 3.0, 0.0};
  return geom::WorldState(geom::Rect{-5, -5, 5, 5}, {}, {}, robot);
}

}  // namespace

TEST(Description, MinimalAction)
{
  const Description d = pick_description();
  EXPECT_EQ(d.properties().size(), 1u);
  EXPECT_EQ(d.type(), "picking-up");
  EXPECT_EQ(d.kind(), Kind::action);
  EXPECT_EQ(to_string(d), "(an action (type picking-up))");
}

TEST(Description, NestedObjectWithPose)
{
  const Pose3D p{1.0, 2.0, 0.9, 0.0};
  const Description cup = make_description(
    Kind::object, Quantifier::the, {prop("type", sym("cup")), prop("pose", p)});
  const Description pick = extend(pick_description(), {prop("object", nest(cup))});
  ASSERT_NE(pick.nested("object"), nullptr);
  EXPECT_EQ(*pick.nested("object"), cup);
  EXPECT_EQ(*pick.nested("object")->get_as<Pose3D>("pose"), p);
}

TEST(Description, DuplicateKeyRejected)
{
  EXPECT_THROW(
    make_description(Kind::action, Quantifier::an, {prop("type", sym("x")), prop("type", sym("y"))}),
    DuplicateKey);
}

TEST(Description, MissingTypeRejected)
{
  EXPECT_THROW(make_description(Kind::action, Quantifier::an, {prop("arm", sym("left"))}), MissingType);
  EXPECT_THROW(make_description(Kind::action, Quantifier::an, {prop("type", 3.0)}), MissingType);
}

TEST(Extend, AddsArm)
{
  const Description d = pick_description();
  const Description g = extend(d, {prop("arm", sym("left"))});
  EXPECT_EQ(g.symbol("arm"), "left");
  EXPECT_TRUE(is_prefix_of(d, g));
  EXPECT_EQ(d.properties().size(), 1u);
}

TEST(Extend, EmptyIsIdentity)
{
  const Description d = pick_description();
  EXPECT_EQ(extend(d, {}), d);
}

TEST(Extend, OverrideRejected)
{
  const Description d = extend(pick_description(), {prop("arm", sym("left"))});
  EXPECT_THROW(extend(d, {prop("arm", sym("right"))}), OverrideAttempt);
  EXPECT_THROW(extend(d, {prop("grasp", sym("top")), prop("grasp", sym("front"))}), DuplicateKey);
}

TEST(GetProperty, PresentAbsentNested)
{
  const Description d = extend(
    pick_description(),
    {prop("arm", sym("left")), prop("object", nest(make_description(Kind::object, Quantifier::an, {prop("type", sym("cup"))})))});
  ASSERT_NE(d.get("arm"), nullptr);
  EXPECT_TRUE(value_equal(*d.get("arm"), sym("left")));
  EXPECT_EQ(d.get("missing"), nullptr);
  ASSERT_NE(d.nested("object"), nullptr);
  EXPECT_EQ(d.nested("object")->type(), "cup");
}

TEST(Extend, GroundingIsMonotone)
{
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Description d = pick_description();
    std::vector<Description> history{d};
    for (int step = 0; step < 8; ++step) {
      std::vector<Property> extra;
      const int n = static_cast<int>(rng.index(3));
      for (int k = 0; k < n; ++k) {
        extra.push_back(prop("k" + std::to_string(step) + "_" + std::to_string(k), rng.uniform()));
      }
      d = extend(d, extra);
      history.push_back(d);
    }
    for (const auto & h : history) {
      EXPECT_TRUE(is_prefix_of(h, d));
    }
  }
}

TEST(KeyPoseTrajectory, LabelOrderEnforced)
{
  EXPECT_THROW(KeyPoseTrajectory({}), InvalidArgument);
  EXPECT_THROW(
    KeyPoseTrajectory({{KeyPoseLabel::grasp, {}}, {KeyPoseLabel::pre_grasp, {}}}), InvalidArgument);
  EXPECT_NO_THROW(
    KeyPoseTrajectory({{KeyPoseLabel::pre_place, {}}, {KeyPoseLabel::place, {}}, {KeyPoseLabel::retract, {}}}));
}

TEST(Constraint, RadiusBoundsValidated)
{
  EXPECT_THROW(make_constraint(ConstraintKind::near, Pose3D{}, 0.9, 0.5), InvalidArgument);
  EXPECT_THROW(make_constraint(ConstraintKind::near, Pose3D{}, -0.1, 0.5), InvalidArgument);
  EXPECT_NO_THROW(make_constraint(ConstraintKind::near, Pose3D{}, 0.5, 0.5));
}

TEST(SampleBaseLocation, AnnulusAroundOrigin)
{
  const geom::WorldState world = empty_world();
  const Pose3D origin{0, 0, 0.8, 0};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    const Pose2D p = sample_base_location(
      {origin}, {make_constraint(ConstraintKind::reachable_for, origin, 0.5, 0.9)}, world, rng);
    const double dist = std::hypot(p.x, p.y);
    EXPECT_GE(dist, 0.5);
    EXPECT_LE(dist, 0.9);
    // Facing the reference: the heading points back at the origin.
    EXPECT_NEAR(normalize_angle(p.theta - std::atan2(-p.y, -p.x)), 0.0, 1e-9);
  }
}

TEST(SampleBaseLocation, FullyBlockedWorld)
{
  geom::RobotState robot;
  robot.base = Pose2D{4.5, 4.5, 0.0};
  const geom::WorldState world(
    geom::Rect{-5, -5, 5, 5},
    {geom::make_body("block", {-3, -3, 3, 3}, 0, 1, geom::BodyKind::furniture)}, {}, robot);
  Rng rng(1);
  const Pose3D origin{0, 0, 0.8, 0};
  EXPECT_THROW(
    sample_base_location({origin}, {make_constraint(ConstraintKind::reachable_for, origin, 0.5, 0.9)}, world, rng),
    NoValidSample);
}

TEST(SampleBaseLocation, Deterministic)
{
  const geom::WorldState world = empty_world();
  const Pose3D origin{0, 0, 0.8, 0};
  const auto c = make_constraint(ConstraintKind::reachable_for, origin, 0.5, 0.9);
  Rng a(77);
  Rng b(77);
  EXPECT_EQ(sample_base_location({origin}, {c}, world, a), sample_base_location({origin}, {c}, world, b));
  EXPECT_THROW(sample_base_location({}, {c}, world, a), InvalidArgument);
}

TEST(ChooseArm, FreeArms)
{
  geom::RobotState robot;
  const Description cup = make_description(Kind::object, Quantifier::a, {prop("type", sym("cup"))});
  Rng a(5);
  Rng b(5);
  EXPECT_EQ(choose_arm(cup, robot, a), choose_arm(cup, robot, b));
  std::set<Arm> seen;
  for (int i = 0; i < 100; ++i) {
    seen.insert(choose_arm(cup, robot, a));
  }
  EXPECT_EQ(seen.size(), 2u);

  robot.arm(Arm::left).attachment = "milk";
  EXPECT_EQ(choose_arm(cup, robot, a), Arm::right);
  robot.arm(Arm::right).attachment = "bowl";
  EXPECT_THROW(choose_arm(cup, robot, a), BothArmsOccupied);
}

TEST(ChooseGrasp, BowlAndSpoonUseTop)
{
  Rng rng(1);
  EXPECT_EQ(choose_grasp("bowl", rng), GraspType::top);
  EXPECT_EQ(choose_grasp("spoon", rng), GraspType::top);
  EXPECT_THROW(choose_grasp("plate", rng), UnknownObjectType);
}

TEST(ChooseGrasp, ImageEqualsAllowedSet)
{
  for (const auto & [type, params] : default_parameter_table()) {
    std::set<GraspType> seen;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      Rng rng(seed);
      seen.insert(choose_grasp(type, rng));
    }
    EXPECT_EQ(seen, std::set<GraspType>(params.grasps.begin(), params.grasps.end())) << type;
  }
  EXPECT_EQ(allowed_grasps(default_parameter_table(), "milk"),
    (std::vector<GraspType>{GraspType::front, GraspType::back}));
}

TEST(GraspParams, TableValues)
{
  EXPECT_DOUBLE_EQ(grasp_params("cup").gripper_opening, 0.09);
  EXPECT_DOUBLE_EQ(grasp_params("cup").grasping_force, 15.0);
  EXPECT_DOUBLE_EQ(grasp_params("spoon").gripper_opening, 0.05);
  EXPECT_DOUBLE_EQ(grasp_params("spoon").grasping_force, 10.0);
  EXPECT_THROW(grasp_params("teapot"), UnknownObjectType);
}

TEST(ReachingTrajectory, FrontGraspOffsets)
{
  const auto t = reaching_trajectory("cup", Arm::right, GraspType::front, Pose3D{1.0, 0.0, 0.9, 0.0});
  ASSERT_EQ(t.poses().size(), 2u);
  const Pose3D g = t.find(KeyPoseLabel::grasp)->pose;
  const Pose3D pre = t.find(KeyPoseLabel::pre_grasp)->pose;
  EXPECT_NEAR(g.x, 0.98, 1e-12);
  EXPECT_NEAR(g.y, 0.0, 1e-12);
  EXPECT_NEAR(g.z, 0.9, 1e-12);
  EXPECT_NEAR(pre.x, 0.88, 1e-12);
  EXPECT_NEAR(pre.y, 0.0, 1e-12);
  EXPECT_EQ(t.poses().front().label, KeyPoseLabel::pre_grasp);
}

TEST(ReachingTrajectory, BackGraspApproachesFromTheOtherSide)
{
  const auto t = reaching_trajectory("milk", Arm::left, GraspType::back, Pose3D{1.0, 0.0, 0.9, 0.0});
  const Pose3D g = t.find(KeyPoseLabel::grasp)->pose;
  EXPECT_NEAR(g.x, 1.02, 1e-12);
  EXPECT_NEAR(std::abs(g.yaw), kPi, 1e-12);
  EXPECT_NEAR(t.find(KeyPoseLabel::pre_grasp)->pose.x, 1.12, 1e-12);
}

TEST(ReachingTrajectory, TopGraspPreGraspAbove)
{
  const auto t = reaching_trajectory("bowl", Arm::left, GraspType::top, Pose3D{0.5, 0.5, 0.8, 1.0});
  const Pose3D g = t.find(KeyPoseLabel::grasp)->pose;
  const Pose3D pre = t.find(KeyPoseLabel::pre_grasp)->pose;
  EXPECT_DOUBLE_EQ(pre.x, g.x);
  EXPECT_DOUBLE_EQ(pre.y, g.y);
  EXPECT_NEAR(pre.z - g.z, 0.10, 1e-12);
}

TEST(ReachingTrajectory, Pure)
{
  const Pose3D p{0.3, -0.2, 1.0, 0.4};
  EXPECT_EQ(
    reaching_trajectory("cereal", Arm::left, GraspType::front, p),
    reaching_trajectory("cereal", Arm::left, GraspType::front, p));
}

TEST(LiftingTrajectory, RaisesGraspPose)
{
  const auto reach = reaching_trajectory("bowl", Arm::left, GraspType::top, Pose3D{0.5, 0.5, 0.9, 0.3});
  const auto lift = lifting_trajectory("bowl", Arm::left, GraspType::top, reach);
  const Pose3D g = reach.find(KeyPoseLabel::grasp)->pose;
  ASSERT_EQ(lift.poses().size(), 1u);
  const Pose3D l = lift.poses().front().pose;
  EXPECT_NEAR(l.z, g.z + 0.08, 1e-12);
  EXPECT_DOUBLE_EQ(l.x, g.x);
  EXPECT_DOUBLE_EQ(l.y, g.y);
  EXPECT_DOUBLE_EQ(l.yaw, g.yaw);

  const auto at_090 = KeyPoseTrajectory({{KeyPoseLabel::grasp, Pose3D{0, 0, 0.90, 0}}});
  EXPECT_NEAR(lifting_trajectory("cup", Arm::right, GraspType::front, at_090).poses()[0].pose.z, 0.98, 1e-12);

  const KeyPoseTrajectory no_grasp({{KeyPoseLabel::pre_grasp, Pose3D{}}});
  EXPECT_THROW(lifting_trajectory("cup", Arm::left, GraspType::front, no_grasp), MissingGraspPose);
}

TEST(LiftingTrajectory, ReachThenLiftKeepsLabelOrder)
{
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const Pose3D p{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.5, 1.2), rng.uniform(-kPi, kPi)};
    const auto type = std::vector<std::string>{"milk", "cup", "cereal", "bowl", "spoon"}[rng.index(5)];
    const GraspType g = choose_grasp(type, rng);
    const auto reach = reaching_trajectory(type, Arm::left, g, p);
    auto poses = reach.poses();
    const auto lift = lifting_trajectory(type, Arm::left, g, reach);
    for (const auto & kp : lift.poses()) {
      poses.push_back(kp);
    }
    EXPECT_NO_THROW(KeyPoseTrajectory{poses});
  }
}
