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

#include <fstream>

#include "fetchproj/scenario.hpp"
#include "test_support.hpp"

using namespace fetchproj;
namespace ft = fetchproj::testing;
using namespace fetchproj::scenario;
using nlohmann::json;

namespace
{

json base_doc()
{
  std::ifstream in(FETCHPROJ_SCENARIO_FILE);
  return json::parse(in);
}

void expect_config_error(const json & doc)
{
  EXPECT_THROW(parse_config(doc), ConfigError) << doc.dump();
}

ObjectMetrics failures(const std::string & name, int coll, int reach)
{
  ObjectMetrics m;
  m.object = name;
  m.collision_failures = coll;
  m.reachability_failures = reach;
  return m;
}

// Failures counted by hand: failed nodes whose failure no failed child repeats.
std::array<int, 3> partition(const tasktree::TaskTree & tree)
{
  std::array<int, 3> counts{0, 0, 0};
  for (const auto & n : tree.nodes()) {
    if (n.status != tasktree::TaskStatus::failed) {
      continue;
    }
    bool repeated = false;
    for (const auto & c : n.children) {
      const auto * child = tree.node_at(c);
      repeated = repeated || (child->status == tasktree::TaskStatus::failed && child->failure == n.failure);
    }
    if (!repeated) {
      ++counts[static_cast<std::size_t>(bucket_of(n.failure->kind))];
    }
  }
  return counts;
}

}  // namespace

TEST(Config, LoadsBaseScenario)
{
  const ScenarioConfig c = load_config(FETCHPROJ_SCENARIO_FILE);
  EXPECT_EQ(c.object_order, (std::vector<std::string>{"milk", "cup", "cereal", "bowl", "spoon"}));
  EXPECT_EQ(c.search_surface, "counter");
  EXPECT_EQ(c.seed, 42u);
  EXPECT_NO_THROW(c.make_world());
}

TEST(Config, RoundTrip)
{
  const ScenarioConfig c = load_config(FETCHPROJ_SCENARIO_FILE);
  const json j = config_to_json(c);
  EXPECT_EQ(config_to_json(parse_config(j)), j);
}

TEST(Config, RejectsInvalidDocuments)
{
  json d = base_doc();
  d.erase("schema_version");
  expect_config_error(d);

  d = base_doc();
  d["schema_version"] = 2;
  expect_config_error(d);

  d = base_doc();
  d["colour"] = "blue";
  expect_config_error(d);

  d = base_doc();
  d["object_order"].push_back("teapot");
  expect_config_error(d);

  d = base_doc();
  d["delivery"]["goals"].erase("cup");
  expect_config_error(d);

  d = base_doc();
  d["search_location"] = "ceiling";
  expect_config_error(d);

  d = base_doc();
  d["projection"]["n_runs"] = 0;
  expect_config_error(d);

  d = base_doc();
  d["projection"]["cost_fn"] = "elegance";
  expect_config_error(d);

  d = base_doc();
  d["noise"]["p_flip"] = 1.5;
  expect_config_error(d);

  d = base_doc();
  d["execution"] = {{"real_time_factor", -1.0}};
  expect_config_error(d);

  d = base_doc();
  d["world"]["robot"]["base"] = {0.3, 2.0, 0.0};
  expect_config_error(d);

  d = base_doc();
  d["world"]["objects"][0]["pose"][2] = 2.0;
  expect_config_error(d);
}

TEST(Config, MissingFileIsConfigError)
{
  EXPECT_THROW(load_config("/nonexistent/scenario.json"), ConfigError);
}

TEST(Buckets, EveryKindHasOneBucket)
{
  using tasktree::FailureKind;
  EXPECT_EQ(bucket_of(FailureKind::navigation_pose_in_collision), FailureBucket::collision);
  EXPECT_EQ(bucket_of(FailureKind::manipulation_pose_in_collision), FailureBucket::collision);
  EXPECT_EQ(bucket_of(FailureKind::manipulation_pose_unreachable), FailureBucket::reachability);
  EXPECT_EQ(bucket_of(FailureKind::object_unreachable), FailureBucket::reachability);
  EXPECT_EQ(bucket_of(FailureKind::perception_object_not_found), FailureBucket::other);
  EXPECT_EQ(bucket_of(FailureKind::gripper_closed_completely), FailureBucket::other);
}

TEST(Aggregate, MeanOfFailureSums)
{
  RunMetrics a;
  a.objects = {failures("milk", 7, 45)};
  RunMetrics b;
  b.objects = {failures("milk", 8, 50)};
  const AggregateTable t = aggregate({a, b});
  ASSERT_EQ(t.objects.size(), 1u);
  EXPECT_DOUBLE_EQ(t.objects[0].failure_sum, 55.0);
  EXPECT_DOUBLE_EQ(t.total.failure_sum, 55.0);
  EXPECT_DOUBLE_EQ(t.objects[0].collision_failures, 7.5);
  EXPECT_THROW(aggregate({}), InvalidArgument);
}

TEST(Aggregate, TotalSuccessIsPerAttempt)
{
  RunMetrics a;
  a.objects = {failures("milk", 0, 0), failures("cup", 0, 1)};
  a.objects[0].success = true;
  RunMetrics b = a;
  b.objects[1].success = true;
  const AggregateTable t = aggregate({a, b});
  EXPECT_DOUBLE_EQ(t.objects[0].success_rate, 1.0);
  EXPECT_DOUBLE_EQ(t.objects[1].success_rate, 0.5);
  EXPECT_DOUBLE_EQ(t.total.success_rate, 0.75);
}

TEST(Table, PrintsFailureSum)
{
  RunMetrics run;
  run.objects = {failures("milk", 7, 45)};
  const std::string table = format_table(run);
  EXPECT_NE(table.find("Sum"), std::string::npos);
  EXPECT_NE(table.find("52"), std::string::npos);
  EXPECT_NE(table.find("Coll. fail."), std::string::npos);
  const std::string records = format_records({run});
  const json first = json::parse(records.substr(0, records.find('\n')));
  EXPECT_EQ(first.at("object"), "milk");
}

TEST(RunScenario, DeterministicAndReplayable)
{
  const ScenarioConfig c = load_config(FETCHPROJ_SCENARIO_FILE);
  const RunResult a = run_scenario(c, 11);
  const RunResult b = run_scenario(c, 11);
  EXPECT_EQ(a.metrics, b.metrics);
  ASSERT_EQ(a.traces.size(), b.traces.size());
  ASSERT_EQ(a.traces.size(), c.object_order.size());
  for (std::size_t i = 0; i < a.traces.size(); ++i) {
    EXPECT_EQ(a.traces[i].bytes, b.traces[i].bytes);
    const auto tree = tasktree::deserialize_tree(a.traces[i].bytes);
    EXPECT_EQ(ft::tree_violation(tree), "");
    const ObjectMetrics replayed = metrics_from_tree(tree);
    EXPECT_EQ(replayed, a.metrics.objects[i]);
    const auto counts = partition(tree);
    EXPECT_EQ(replayed.collision_failures, counts[0]);
    EXPECT_EQ(replayed.reachability_failures, counts[1]);
    EXPECT_EQ(replayed.other_failures, counts[2]);
  }
}

TEST(RunScenario, ProjectionOnIsDeterministic)
{
  ScenarioConfig c = load_config(FETCHPROJ_SCENARIO_FILE);
  c.projection.enabled = true;
  c.projection.n_runs = 2;
  const RunResult a = run_scenario(c, 3);
  const RunResult b = run_scenario(c, 3);
  EXPECT_EQ(a.metrics, b.metrics);
  for (std::size_t i = 0; i < a.traces.size(); ++i) {
    EXPECT_EQ(a.traces[i].bytes, b.traces[i].bytes);
    EXPECT_EQ(a.metrics.objects[i].projection_runs, 2);
  }
  for (const auto & t : a.timing) {
    EXPECT_TRUE(t.belief_restored);
  }
}
