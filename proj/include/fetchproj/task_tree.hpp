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

#ifndef FETCHPROJ__TASK_TREE_HPP_
#define FETCHPROJ__TASK_TREE_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fetchproj/designator.hpp"

namespace fetchproj::tasktree
{

using designator::Description;

enum class FailureKind
{
  perception_object_not_found,
  object_nowhere_to_be_found,
  navigation_pose_unreachable,
  navigation_pose_in_collision,
  navigation_goal_not_reached,
  ptu_goal_unreachable,
  manipulation_pose_unreachable,
  manipulation_goal_not_reached,
  manipulation_pose_in_collision,
  gripper_closed_completely,
  object_unreachable,
  object_unfetchable,
  object_undeliverable,
};

inline constexpr FailureKind kAllFailureKinds[] = {
  FailureKind::perception_object_not_found, FailureKind::object_nowhere_to_be_found,
  FailureKind::navigation_pose_unreachable, FailureKind::navigation_pose_in_collision,
  FailureKind::navigation_goal_not_reached, FailureKind::ptu_goal_unreachable,
  FailureKind::manipulation_pose_unreachable, FailureKind::manipulation_goal_not_reached,
  FailureKind::manipulation_pose_in_collision, FailureKind::gripper_closed_completely,
  FailureKind::object_unreachable, FailureKind::object_unfetchable,
  FailureKind::object_undeliverable,
};

std::string_view to_string(FailureKind kind);
std::optional<FailureKind> parse_failure_kind(std::string_view text);

struct Failure
{
  FailureKind kind;
  std::string context;

  bool operator==(const Failure &) const = default;
};

struct PathSegment
{
  std::string label;
  int occurrence{1};

  auto operator<=>(const PathSegment &) const = default;
};

using TaskPath = std::vector<PathSegment>;

/// "/transporting.1/fetching.1/navigating.2"; the root renders as "/".
std::string to_string(const TaskPath & path);
/// Inverse of to_string; nullopt on malformed text.
std::optional<TaskPath> parse_path(std::string_view text);
/// True when `prefix` is an ancestor-or-self of `path`.
bool path_has_prefix(const TaskPath & path, const TaskPath & prefix);

enum class TaskStatus { created, running, suspended, succeeded, evaporated, failed };

std::string_view to_string(TaskStatus status);
std::optional<TaskStatus> parse_status(std::string_view text);
bool legal_transition(TaskStatus from, TaskStatus to);
bool is_terminal(TaskStatus status);

using LogicalTime = std::uint64_t;

/// Result of a task: the grounded description on success, the failure otherwise.
using Outcome = std::variant<Description, Failure>;

struct TaskNode
{
  TaskPath path;
  TaskStatus status{TaskStatus::created};
  std::optional<TaskPath> parent;
  std::vector<TaskPath> children;
  std::string code_label;
  std::vector<Description> parameters;
  std::optional<Outcome> outcome;
  std::optional<Failure> failure;
  std::optional<LogicalTime> created_at;
  std::optional<LogicalTime> started_at;
  std::optional<LogicalTime> ended_at;

  bool operator==(const TaskNode &) const = default;
};

class IllegalTransition : public std::logic_error
{
public:
  using std::logic_error::logic_error;
};

class MalformedTrace : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class TaskTree
{
public:
  const TaskNode * node_at(const TaskPath & path) const;
  const TaskNode & root() const {return nodes_.front();}
  /// Nodes in creation order.
  const std::vector<TaskNode> & nodes() const {return nodes_;}
  std::size_t size() const {return nodes_.size();}

  /// Depth-first, left-to-right listing of the subtree at `from` (empty if
  /// the path is unknown).
  std::vector<const TaskNode *> document_order(const TaskPath & from = {}) const;

  /// True when no node is created, running or suspended.
  bool finalized() const;

  /// Structural equality keyed by path.
  bool operator==(const TaskTree & other) const;

private:
  friend class TaskRecorder;
  friend TaskTree deserialize_tree(std::string_view bytes);

  std::vector<TaskNode> nodes_;
  std::map<TaskPath, std::size_t> index_;
};

struct TaskHandle
{
  std::size_t index{0};

  bool operator==(const TaskHandle &) const = default;
};

namespace result
{
struct Succeeded {std::optional<Description> grounded;};
struct Failed {Failure failure;};
struct Evaporated {};
}  // namespace result

using TaskResult = std::variant<result::Succeeded, result::Failed, result::Evaporated>;

/// Records a task tree while a plan runs. Every tree event advances the
/// logical clock; executors advance it once per primitive via tick().
class TaskRecorder
{
public:
  explicit TaskRecorder(std::vector<Description> root_parameters = {});

  /// Opens a child of the current node and makes it current.
  TaskHandle open_task(std::string label, std::vector<Description> parameters);
  TaskHandle open_task_under(TaskHandle parent, std::string label, std::vector<Description> parameters);

  /// Terminates a running or suspended node; the current node becomes its parent.
  /// A grounded outcome must extend the node's first parameter (OverrideAttempt).
  void close_task(TaskHandle handle, TaskResult result);
  void suspend(TaskHandle handle);
  void resume(TaskHandle handle);

  TaskHandle root() const {return TaskHandle{0};}
  TaskHandle current() const {return current_;}
  void set_current(TaskHandle handle);

  LogicalTime tick();
  LogicalTime now() const {return clock_;}

  const TaskNode & node(TaskHandle handle) const;
  /// Live view of the tree being recorded.
  const TaskTree & tree() const {return tree_;}

  /// Closes the root (succeeded) if it is still running and returns the
  /// finished tree. Throws IllegalTransition while any other task is open.
  TaskTree finalize();

private:
  TaskNode & mutable_node(TaskHandle handle);
  void transition(TaskNode & node, TaskStatus to);

  TaskTree tree_;
  TaskHandle current_{0};
  LogicalTime clock_{0};
  bool finalized_{false};
};

nlohmann::json to_json(const designator::Value & value);
nlohmann::json to_json(const Description & desc);
nlohmann::json to_json(const Failure & failure);
designator::Value value_from_json(const nlohmann::json & j);
Description description_from_json(const nlohmann::json & j);
Failure failure_from_json(const nlohmann::json & j);

/// Canonical encoding: same tree, same bytes. Throws IllegalTransition when
/// the tree still has open tasks.
std::string serialize_tree(const TaskTree & tree);
/// Throws MalformedTrace on any syntactic or structural problem.
TaskTree deserialize_tree(std::string_view bytes);

}  // namespace fetchproj::tasktree

#endif  // FETCHPROJ__TASK_TREE_HPP_
