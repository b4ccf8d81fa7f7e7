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

#ifndef FETCHPROJ__SCENARIO_HPP_
#define FETCHPROJ__SCENARIO_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fetchproj/executor.hpp"
#include "fetchproj/plans.hpp"
#include "fetchproj/task_tree.hpp"
#include "fetchproj/world.hpp"

/// Breakfast-table scenario runner: configuration, metrics and output.
namespace fetchproj::scenario
{

inline constexpr int kSchemaVersion = 1;

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct ObjectSpec
{
  std::string name;
  std::string type;
  Pose3D pose;
  geom::Dimensions dims;
};

struct ScenarioConfig
{
  geom::Rect bounds;
  std::vector<geom::Body> bodies;
  std::vector<ObjectSpec> objects;
  Pose2D robot_start;
  geom::RobotGeometry geometry;
  std::string search_surface;
  std::string delivery_surface;
  std::map<std::string, Pose3D> goals;
  std::vector<std::string> object_order;
  std::uint64_t seed{0};
  plans::ProjectionSettings projection{};
  plans::ExecutionSettings execution{};
  plans::PlanSettings plan{};

  /// Ground-truth world at the start of a run.
  geom::WorldState make_world() const;
};

/// Parses and validates a configuration document. Throws ConfigError.
ScenarioConfig parse_config(const nlohmann::json & doc);
ScenarioConfig load_config(const std::filesystem::path & file);
nlohmann::json config_to_json(const ScenarioConfig & config);

enum class FailureBucket { collision, reachability, other };

FailureBucket bucket_of(tasktree::FailureKind kind);

struct ObjectMetrics
{
  std::string object;
  std::uint64_t runtime_steps{0};
  std::optional<Arm> arm;
  std::optional<GraspType> grasp;
  bool success{false};
  int collision_failures{0};
  int reachability_failures{0};
  int other_failures{0};
  // Projection phase: successful candidates out of runs (0 of 0 when off).
  int projection_successes{0};
  int projection_runs{0};

  int failure_sum() const {return collision_failures + reachability_failures;}
  bool operator==(const ObjectMetrics &) const = default;
};

/// Failures counted where they arise: a failed task repeating the failure
/// of one of its failed children is not counted again.
ObjectMetrics metrics_from_tree(const tasktree::TaskTree & tree);

struct RunMetrics
{
  std::uint64_t seed{0};
  bool projection{false};
  std::vector<ObjectMetrics> objects;

  ObjectMetrics totals() const;
  bool operator==(const RunMetrics &) const = default;
};

/// Wall-clock measurements; never part of traces or compared metrics.
struct ObjectTiming
{
  std::string object;
  double projection_seconds{0.0};
  double execution_seconds{0.0};
  bool belief_restored{true};
};

struct Trace
{
  std::string object;
  std::string bytes;
};

struct RunResult
{
  RunMetrics metrics;
  std::vector<Trace> traces;
  std::vector<ObjectTiming> timing;
};

/// Transports every object in order on the simulated-real executor pair.
RunResult run_scenario(const ScenarioConfig & config, std::uint64_t seed);

struct AggregateRow
{
  std::string object;
  double runtime_steps{0.0};
  double success_rate{0.0};
  double collision_failures{0.0};
  double reachability_failures{0.0};
  double failure_sum{0.0};
  double projection_successes{0.0};
  int projection_runs{0};
  int attempts{0};
};

struct AggregateTable
{
  std::vector<AggregateRow> objects;
  AggregateRow total;
};

/// Per-object and total means over runs. Throws InvalidArgument on empty input.
AggregateTable aggregate(const std::vector<RunMetrics> & runs);

std::string format_table(const RunMetrics & run);
std::string format_table(const AggregateTable & table);
/// One JSON record per (run, object) plus a total record per run.
std::string format_records(const std::vector<RunMetrics> & runs);
std::string format_aggregate_record(const AggregateTable & table);
std::string format_timing(const std::vector<RunResult> & results);

/// File name of an object's trace within a run directory.
std::string trace_file_name(std::size_t index, const std::string & object);

}  // namespace fetchproj::scenario

#endif  // FETCHPROJ__SCENARIO_HPP_
