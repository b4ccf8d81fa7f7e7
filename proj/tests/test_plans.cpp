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

#include "fetchproj/plans.hpp"
#include "fetchproj/scenario.hpp"
#include "test_support.hpp"

using namespace fetchproj;
namespace ft = fetchproj::testing;
using namespace fetchproj::plans;
using tasktree::FailureKind;
using tasktree::TaskRecorder;
using tasktree::TaskStatus;
using tasktree::TaskTree;

namespace
{

const scenario::ScenarioConfig & config()
{
  static const scenario::ScenarioConfig c = scenario::load_config(FETCHPROJ_SCENARIO_FILE);
  return c;
}

struct Harness
{
  geom::WorldState belief = config().make_world();
  Executor exec{belief, 7};
  TaskRecorder recorder;
  PlanSettings settings = config().plan;
  PlanContext ctx{exec, recorder, settings};
};

std::size_t children_of_type(const TaskTree & tree, const tasktree::TaskNode & node, const std::string & type)
{
  std::size_t n = 0;
  for (const auto & c : node.children) {
    const auto * child = tree.node_at(c);
    if (!child->parameters.empty() && child->parameters.front().type() == type) {
      ++n;
    }
  }
  return n;
}

const tasktree::TaskNode * first_of_type(const TaskTree & tree, const std::string & type)
{
  for (const auto * n : tree.document_order()) {
    if (!n->parameters.empty() && n->parameters.front().type() == type) {
      return n;
    }
  }
  return nullptr;
}

designator::Description found(Harness & h, const std::string & type)
{
  const PlanOutcome r = plan_search(h.ctx, object_description(type), surface_location("counter"));
  EXPECT_TRUE(succeeded(r));
  return *std::get<designator::Description>(r).nested("found");
}

}  // namespace

TEST(Plans, UnknownActionType)
{
  Harness h;
  const auto dance = designator::make_description(
    designator::Kind::action, designator::Quantifier::a, {designator::prop("type", designator::sym("dancing"))});
  EXPECT_THROW(perform(h.ctx, dance), UnknownActionType);
}

TEST(Plans, SearchFindsPresentObject)
{
  Harness h;
  const auto obj = found(h, "milk");
  EXPECT_EQ(obj.symbol("name"), "milk");
  EXPECT_EQ(*obj.get_as<Pose3D>("pose"), h.belief.find_object("milk")->pose);
}

TEST(Plans, SearchGivesUpAfterConfiguredAttempts)
{
  Harness h;
  const PlanOutcome r = plan_search(h.ctx, object_description("teapot"), surface_location("counter"));
  ASSERT_FALSE(succeeded(r));
  EXPECT_EQ(failure_of(r)->kind, FailureKind::object_nowhere_to_be_found);
  const TaskTree tree = h.recorder.finalize();
  const auto * search = first_of_type(tree, "searching");
  ASSERT_NE(search, nullptr);
  EXPECT_EQ(search->status, TaskStatus::failed);
  EXPECT_EQ(children_of_type(tree, *search, "navigating"), static_cast<std::size_t>(h.settings.retries.search));
  EXPECT_EQ(ft::tree_violation(tree), "");
}

TEST(Plans, FetchThenDeliver)
{
  Harness h;
  const auto obj = found(h, "cup");
  const PlanOutcome fetched = plan_fetch(h.ctx, obj);
  ASSERT_TRUE(succeeded(fetched));
  const auto & f = std::get<designator::Description>(fetched);
  const Arm arm = *parse_arm(*f.symbol("arm"));
  const GraspType grasp = *parse_grasp(*f.symbol("grasp"));
  EXPECT_EQ(h.belief.robot().arm(arm).attachment, "cup");

  const Pose3D goal = config().goals.at("cup");
  const auto target = placement_location("table", goal);
  const auto place = placing_action(obj, arm, grasp);
  const PlanOutcome delivered = plan_deliver(h.ctx, obj, target, nullptr, &place);
  ASSERT_TRUE(succeeded(delivered));
  const auto * placed = std::get<designator::Description>(delivered).get_as<Pose3D>("placement");
  ASSERT_NE(placed, nullptr);
  const Pose3D at = h.belief.find_object("cup")->pose;
  EXPECT_NEAR(at.x, placed->x, 1e-6);
  EXPECT_NEAR(at.y, placed->y, 1e-6);
  EXPECT_NEAR(at.z, placed->z, 1e-6);
  EXPECT_EQ(h.belief.find_object("cup")->support, "table");
  EXPECT_FALSE(h.belief.robot().arm(arm).attachment);
  EXPECT_EQ(ft::tree_violation(h.recorder.finalize()), "");
}

TEST(Plans, FetchRetriesAreBounded)
{
  Harness h;
  const auto obj = found(h, "cereal");
  h.settings.retries.fetch = 3;
  // A distance band that keeps the base out of reach of the object.
  h.settings.fetch_radius_min = 1.5;
  h.settings.fetch_radius_max = 1.6;
  const PlanOutcome r = plan_fetch(h.ctx, obj);
  ASSERT_FALSE(succeeded(r));
  EXPECT_EQ(failure_of(r)->kind, FailureKind::object_unfetchable);
  const TaskTree tree = h.recorder.finalize();
  const auto * fetch = first_of_type(tree, "fetching");
  ASSERT_NE(fetch, nullptr);
  EXPECT_EQ(children_of_type(tree, *fetch, "navigating"), 3u);
  EXPECT_EQ(ft::tree_violation(tree), "");
}

TEST(Plans, FailedReachEvaporatesGripperBranch)
{
  Harness h;
  const auto obj = found(h, "bowl");
  // Straight from the search pose: the bowl is out of the arm's reach.
  h.exec.navigate(Pose2D{3.0, 3.0, 0.0});
  const PlanOutcome r = perform(h.ctx, picking_up_action(obj, Arm::left, GraspType::top));
  ASSERT_FALSE(succeeded(r));
  const TaskTree tree = h.recorder.finalize();
  const auto * pick = first_of_type(tree, "picking-up");
  ASSERT_NE(pick, nullptr);
  ASSERT_EQ(pick->children.size(), 2u);
  const auto * opening = tree.node_at(pick->children[0]);
  const auto * reaching = tree.node_at(pick->children[1]);
  EXPECT_EQ(opening->parameters.front().type(), "opening-gripper");
  EXPECT_EQ(opening->status, TaskStatus::evaporated);
  EXPECT_EQ(reaching->status, TaskStatus::failed);
  EXPECT_EQ(pick->failure->kind, reaching->failure->kind);
  EXPECT_EQ(ft::tree_violation(tree), "");
}

TEST(Plans, TransportIsDeterministic)
{
  const auto run = [] {
      geom::WorldState truth = config().make_world();
      geom::WorldState belief = config().make_world();
      Executor exec(truth, belief, config().execution, 1234);
      TaskRecorder recorder;
      PlanContext ctx{exec, recorder, config().plan};
      const auto r = plan_transport(
        ctx, object_description("milk"), surface_location("counter"),
        placement_location("table", config().goals.at("milk")), ProjectionSettings{});
      EXPECT_TRUE(succeeded(r.outcome));
      return tasktree::serialize_tree(recorder.finalize());
    };
  EXPECT_EQ(run(), run());
}
