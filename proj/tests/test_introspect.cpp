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

#include "fetchproj/introspect.hpp"
#include "test_support.hpp"

using namespace fetchproj;
namespace ft = fetchproj::testing;
using namespace fetchproj::introspect;
using designator::Kind;
using designator::Quantifier;
using designator::extend;
using designator::make_description;
using designator::prop;
using designator::sym;
using tasktree::Failure;
using tasktree::FailureKind;
using tasktree::TaskRecorder;
namespace result = tasktree::result;

namespace
{

Description action(const std::string & type)
{
  return make_description(Kind::action, Quantifier::an, {prop("type", sym(type))});
}

Description grounded(const std::string & type, const std::string & tag)
{
  return extend(action(type), {prop("tag", sym(tag))});
}

void leaf(TaskRecorder & rec, const std::string & type, bool ok, const std::string & tag)
{
  const auto h = rec.open_task(type, {action(type)});
  if (ok) {
    rec.close_task(h, result::Succeeded{grounded(type, tag)});
  } else {
    rec.close_task(h, result::Failed{Failure{FailureKind::manipulation_goal_not_reached, ""}});
  }
}

// One transport: a failed first grasp, a successful retry, then a delivery.
tasktree::TaskTree transport_tree(bool pick_succeeds)
{
  TaskRecorder rec;
  const auto t = rec.open_task("transporting", {action("transporting")});
  const auto f = rec.open_task("fetching", {action("fetching")});
  leaf(rec, "navigating", true, "nav-a");
  leaf(rec, "picking-up", false, "pick-a");
  leaf(rec, "navigating", true, "nav-b");
  leaf(rec, "picking-up", pick_succeeds, "pick-b");
  rec.close_task(f, result::Succeeded{});
  const auto d = rec.open_task("delivering", {action("delivering")});
  leaf(rec, "navigating", true, "nav-c");
  leaf(rec, "placing", true, "place-c");
  rec.close_task(d, result::Succeeded{grounded("delivering", "d")});
  rec.close_task(t, result::Succeeded{});
  return rec.finalize();
}

std::string tag_of(const Description & d)
{
  return d.symbol("tag").value_or("?");
}

}  // namespace

TEST(Introspect, TasksFollowDocumentOrder)
{
  const auto tree = transport_tree(true);
  const auto listed = tasks(tree).to_vector();
  ASSERT_EQ(listed.size(), tree.size());
  EXPECT_EQ(listed, ft::flat_document_order(tree, {}));
  EXPECT_EQ(tasks(tree, TaskPath{{"nowhere", 1}}).count(), 0u);
}

TEST(Introspect, FieldAccessors)
{
  const auto tree = transport_tree(true);
  const auto * pick = tree.node_at({{"transporting", 1}, {"fetching", 1}, {"picking-up", 1}});
  ASSERT_NE(pick, nullptr);
  ASSERT_NE(task_failure(*pick), nullptr);
  EXPECT_EQ(task_failure(*pick)->kind, FailureKind::manipulation_goal_not_reached);
  EXPECT_TRUE(task_field(*pick, TaskField::failure));
  EXPECT_TRUE(task_field(*pick, TaskField::ended_at));
  EXPECT_EQ(std::get<TaskPath>(*task_field(*pick, TaskField::path)), pick->path);
  EXPECT_TRUE(is_action_task(*pick));
  EXPECT_EQ(action_of(*pick)->type(), "picking-up");
}

TEST(Introspect, FetchAndDeliverOnTransport)
{
  const auto tree = transport_tree(true);
  const auto params = successful_fetch_and_deliver_params(tree);
  ASSERT_TRUE(params);
  EXPECT_EQ(tag_of(params->pick_nav), "nav-b");
  EXPECT_EQ(tag_of(params->pick), "pick-b");
  EXPECT_EQ(tag_of(params->place_nav), "nav-c");
  EXPECT_EQ(tag_of(params->place), "place-c");
  EXPECT_EQ(fetch_and_deliver_solutions(tree, {}).count(), 1u);
}

TEST(Introspect, NoSolutionWithoutSuccessfulPick)
{
  const auto tree = transport_tree(false);
  EXPECT_FALSE(successful_fetch_and_deliver_params(tree));
}

TEST(Introspect, SiblingAction)
{
  const auto tree = transport_tree(true);
  const auto * pick = tree.node_at({{"transporting", 1}, {"fetching", 1}, {"picking-up", 2}});
  ASSERT_NE(pick, nullptr);
  const auto * prev = sibling_action(tree, {}, *pick, "navigating", Direction::previous);
  ASSERT_NE(prev, nullptr);
  EXPECT_EQ(tag_of(*action_of(*prev)), "nav-b");
  const auto * next = sibling_action(tree, {}, *pick, "navigating", Direction::next);
  ASSERT_NE(next, nullptr);
  EXPECT_EQ(tag_of(*action_of(*next)), "nav-c");
  EXPECT_EQ(sibling_action(tree, {}, *pick, "looking", Direction::previous), nullptr);
}

TEST(Introspect, StreamsAreRestartable)
{
  const auto s = Stream<int>::from_vector({1, 2, 3, 4});
  const auto even = s.filter([](const int & v) {return v % 2 == 0;});
  EXPECT_EQ(even.to_vector(), (std::vector<int>{2, 4}));
  EXPECT_EQ(even.to_vector(), (std::vector<int>{2, 4}));
  const auto pairs = s.flat_map<int>(
    [](const int & v) {return Stream<int>::from_vector(std::vector<int>(static_cast<std::size_t>(v), v));});
  EXPECT_EQ(pairs.count(), 10u);
  EXPECT_EQ(Stream<int>::empty().first(), std::nullopt);
}

TEST(Introspect, MatchesBruteForceOnRandomTrees)
{
  Rng rng(31);
  const std::vector<std::string> types{"fetching", "delivering", "picking-up", "placing", "navigating"};
  for (int trial = 0; trial < 60; ++trial) {
    const auto tree = ft::random_tree(rng, 150);
    EXPECT_EQ(tasks(tree).to_vector(), ft::flat_document_order(tree, {}));
    for (const TaskNode & n : tree.nodes()) {
      EXPECT_EQ(tasks(tree, n.path).to_vector(), ft::flat_document_order(tree, n.path));
    }
    for (const auto & type : types) {
      const auto got = action_subtasks(tree, {}, type).to_vector();
      const auto want = ft::brute_action_subtasks(tree, {}, type);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].node, want[i].node);
        EXPECT_EQ(got[i].action, want[i].action);
      }
    }
    for (const TaskNode & n : tree.nodes()) {
      for (auto dir : {Direction::previous, Direction::next}) {
        EXPECT_EQ(
          sibling_action(tree, {}, n, "navigating", dir),
          ft::brute_sibling_action(tree, {}, n, "navigating", dir));
      }
    }
    for (const TaskNode & n : tree.nodes()) {
      const auto got = fetch_and_deliver_solutions(tree, n.path).to_vector();
      const auto want = ft::brute_fetch_and_deliver(tree, n.path);
      ASSERT_EQ(got.size(), want.size()) << to_string(n.path);
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_TRUE(ft::same_params(got[i], want[i]));
      }
      // The rule decomposes into an independent fetch half and deliver half.
      const bool has_value = successful_fetch_and_deliver_params(tree, n.path).has_value();
      EXPECT_EQ(
        has_value,
        ft::brute_fetch_halves(tree, n.path) > 0 && ft::brute_deliver_halves(tree, n.path) > 0);
    }
  }
}
