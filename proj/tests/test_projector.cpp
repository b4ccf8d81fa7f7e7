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

#include <algorithm>

#include "fetchproj/projector.hpp"
#include "fetchproj/scenario.hpp"
#include "test_support.hpp"

using namespace fetchproj;
namespace ft = fetchproj::testing;
using namespace fetchproj::projector;
using designator::Kind;
using designator::Quantifier;
using designator::extend;
using designator::make_description;
using designator::prop;
using designator::sym;
using tasktree::TaskRecorder;
namespace result = tasktree::result;

namespace
{

const scenario::ScenarioConfig & config()
{
  static const scenario::ScenarioConfig c = scenario::load_config(FETCHPROJ_SCENARIO_FILE);
  return c;
}

Description action(const std::string & type)
{
  return make_description(Kind::action, Quantifier::an, {prop("type", sym(type))});
}

FetchDeliverParams dummy_params()
{
  return FetchDeliverParams{action("navigating"), action("picking-up"), action("navigating"), action("placing")};
}

Candidate candidate(int run, double cost, bool ok)
{
  return Candidate{run, tasktree::TaskTree{}, ok ? std::optional(dummy_params()) : std::nullopt, cost};
}

void nav(TaskRecorder & rec, double x, double y)
{
  const auto h = rec.open_task("navigating", {action("navigating")});
  rec.close_task(h, result::Succeeded{extend(action("navigating"), {prop("pose", Pose2D{x, y, 0.0})})});
}

void grounded_leaf(TaskRecorder & rec, const std::string & type)
{
  const auto h = rec.open_task(type, {action(type)});
  rec.close_task(
    h, result::Succeeded{extend(action(type), {prop("arm", sym("left")), prop("grasp", sym("front"))})});
}

// Searches the object on the belief so that the body has a found description.
struct Scene
{
  geom::WorldState belief = config().make_world();
  plans::Executor exec{belief, 3};
  TaskRecorder recorder;
  plans::PlanContext ctx{exec, recorder, config().plan};
  Body body;

  explicit Scene(const std::string & object)
  {
    const auto searched = plans::plan_search(
      ctx, plans::object_description(object), plans::surface_location(config().search_surface));
    const auto found = *std::get<Description>(searched).nested("found");
    body = plans::fetch_and_deliver_body(
      found, plans::placement_location(config().delivery_surface, config().goals.at(object)));
  }
};

}  // namespace

TEST(SelectWinner, ArgminWithLowestIndexOnTies)
{
  const std::vector<Candidate> c{
    candidate(1, 3.0, true), candidate(2, 1.0, true), candidate(3, 1.0, true), candidate(4, 0.5, false)};
  EXPECT_EQ(select_winner(c), 1u);
  EXPECT_FALSE(select_winner({candidate(1, kInfiniteCost, false), candidate(2, kInfiniteCost, false)}));
  EXPECT_FALSE(select_winner({}));
}

TEST(CostByDistance, SumsNavigationLegs)
{
  TaskRecorder rec(projection_root_parameters(Pose2D{0, 0, 0}));
  const auto f = rec.open_task("fetching", {action("fetching")});
  nav(rec, 1, 0);
  grounded_leaf(rec, "picking-up");
  rec.close_task(f, result::Succeeded{});
  const auto d = rec.open_task("delivering", {action("delivering")});
  nav(rec, 1, 1);
  grounded_leaf(rec, "placing");
  rec.close_task(d, result::Succeeded{});
  const auto tree = rec.finalize();
  EXPECT_DOUBLE_EQ(cost_by_distance(tree), 2.0);
  EXPECT_DOUBLE_EQ((*cost_function("distance"))(tree), 2.0);
  EXPECT_FALSE(cost_function("time"));

  const auto params = extract_parameters(tree);
  ASSERT_TRUE(params);
  EXPECT_EQ(*params->pick_nav.get_as<Pose2D>("pose"), (Pose2D{1, 0, 0}));
  EXPECT_EQ(params->pick.symbol("arm"), "left");
  const Bindings b = bindings_from(*params);
  ASSERT_NE(b.get(kFetchRobotLocation), nullptr);
  EXPECT_EQ(*b.get(kDeliverRobotLocation)->get_as<Pose2D>("pose"), (Pose2D{1, 1, 0}));
}

TEST(CostByDistance, InfiniteWithoutSolution)
{
  TaskRecorder rec(projection_root_parameters(Pose2D{0, 0, 0}));
  nav(rec, 1, 0);
  EXPECT_EQ(cost_by_distance(rec.finalize()), kInfiniteCost);
}

TEST(Bindings, BindOnceWithMatchingKind)
{
  Bindings b;
  EXPECT_FALSE(b.any_bound());
  EXPECT_THROW(b.bind(kPickUpAction, plans::robot_location(Pose2D{})), InvalidArgument);
  b.bind(kPickUpAction, action("picking-up"));
  EXPECT_TRUE(b.any_bound());
  EXPECT_THROW(b.bind(kPickUpAction, action("picking-up")), InvalidArgument);
  EXPECT_THROW(b.bind("elsewhere", action("picking-up")), InvalidArgument);
}

TEST(Project, RestoresBeliefAfterEveryRun)
{
  Scene s("milk");
  const auto before = s.belief.contents();
  const auto cands = project(transport_slots(), 4, cost_by_distance, s.body, s.belief, config().plan, 99);
  EXPECT_EQ(s.belief.contents(), before);
  ASSERT_EQ(cands.size(), 4u);
  for (std::size_t i = 0; i < cands.size(); ++i) {
    EXPECT_EQ(cands[i].run_index, static_cast<int>(i) + 1);
  }
  EXPECT_TRUE(std::any_of(cands.begin(), cands.end(), [](const Candidate & c) {return c.success();}));
}

TEST(Project, RunsAreIsolatedBySeed)
{
  Scene s("cup");
  const std::uint64_t master = 5;
  const auto cands = project(transport_slots(), 4, cost_by_distance, s.body, s.belief, config().plan, master);
  // Re-running single runs in reverse order reproduces each tree exactly.
  for (int i = 4; i >= 1; --i) {
    const auto again = project_once(
      transport_slots(), i, cost_by_distance, s.body, s.belief, config().plan,
      derive_seed(master, static_cast<std::uint64_t>(i)));
    EXPECT_EQ(tasktree::serialize_tree(again.tree), tasktree::serialize_tree(cands[i - 1].tree));
    EXPECT_EQ(again.cost, cands[i - 1].cost);
  }
}

TEST(WithProjectedTaskTree, FallsBackWhenNoRunSucceeds)
{
  Scene s("milk");
  int real_runs = 0;
  const Body body = [&](plans::PlanContext & ctx, const RunInfo & run) -> Outcome {
      if (run.projected) {
        return tasktree::Failure{tasktree::FailureKind::object_unfetchable, "projected"};
      }
      ++real_runs;
      EXPECT_FALSE(run.bindings.any_bound());
      return s.body(ctx, run);
    };
  const auto before = s.belief.contents();
  const auto r = with_projected_task_tree(transport_slots(), 3, cost_by_distance, body, s.ctx, 1);
  EXPECT_FALSE(r.winner);
  EXPECT_EQ(r.candidates.size(), 3u);
  EXPECT_EQ(real_runs, 1);
  EXPECT_TRUE(r.belief_restored);
  EXPECT_NE(s.belief.contents(), before);
}

TEST(WithProjectedTaskTree, WinnerBindingsReachTheRealRun)
{
  Scene s("cup");
  const auto r = with_projected_task_tree(transport_slots(), 4, cost_by_distance, s.body, s.ctx, 17);
  ASSERT_TRUE(r.winner);
  EXPECT_TRUE(r.belief_restored);
  EXPECT_TRUE(r.bound.any_bound());
  const auto & win = r.candidates[*r.winner];
  for (const auto & c : r.candidates) {
    if (c.success()) {
      EXPECT_LE(win.cost, c.cost);
    }
  }
  EXPECT_EQ(
    *r.bound.get(kFetchRobotLocation)->get_as<Pose2D>("pose"), *win.parameters->pick_nav.get_as<Pose2D>("pose"));
}

TEST(GridOracle, WinnerMatchesExhaustiveSearch)
{
  Rng rng(404);
  const auto settings = ft::grid_settings();
  for (int w = 0; w < 2; ++w) {
    ft::GridWorld grid = ft::random_grid_world(rng);
    const auto cands = project(
      transport_slots(), ft::GridWorld::kGridSize, cost_by_distance, ft::grid_body(grid),
      grid.world, settings, derive_seed(77, static_cast<std::uint64_t>(w)));
    const auto winner = select_winner(cands);
    const auto brute = ft::brute_force_grid(grid);
    EXPECT_GT(brute.feasible, 0);
    ASSERT_EQ(winner.has_value(), brute.run.has_value());
    if (winner) {
      EXPECT_EQ(cands[*winner].run_index, *brute.run);
      EXPECT_NEAR(cands[*winner].cost, brute.cost, 1e-9);
    }
  }
}
