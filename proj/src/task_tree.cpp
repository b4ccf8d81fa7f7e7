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

#include "fetchproj/task_tree.hpp"

#include <algorithm>
#include <charconv>

namespace fetchproj::tasktree
{

using nlohmann::json;

std::string_view to_string(FailureKind kind)
{
  switch (kind) {
    case FailureKind::perception_object_not_found: return "perception-object-not-found";
    case FailureKind::object_nowhere_to_be_found: return "object-nowhere-to-be-found";
    case FailureKind::navigation_pose_unreachable: return "navigation-pose-unreachable";
    case FailureKind::navigation_pose_in_collision: return "navigation-pose-in-collision";
    case FailureKind::navigation_goal_not_reached: return "navigation-goal-not-reached";
    case FailureKind::ptu_goal_unreachable: return "ptu-goal-unreachable";
    case FailureKind::manipulation_pose_unreachable: return "manipulation-pose-unreachable";
    case FailureKind::manipulation_goal_not_reached: return "manipulation-goal-not-reached";
    case FailureKind::manipulation_pose_in_collision: return "manipulation-pose-in-collision";
    case FailureKind::gripper_closed_completely: return "gripper-closed-completely";
    case FailureKind::object_unreachable: return "object-unreachable";
    case FailureKind::object_unfetchable: return "object-unfetchable";
    case FailureKind::object_undeliverable: return "object-undeliverable";
  }
  return "unknown";
}

std::optional<FailureKind> parse_failure_kind(std::string_view text)
{
  for (auto k : kAllFailureKinds) {
    if (to_string(k) == text) {
      return k;
    }
  }
  return std::nullopt;
}

std::string to_string(const TaskPath & path)
{
  if (path.empty()) {
    return "/";
  }
  std::string out;
  for (const auto & seg : path) {
    out += '/';
    out += seg.label;
    out += '.';
    out += std::to_string(seg.occurrence);
  }
  return out;
}

std::optional<TaskPath> parse_path(std::string_view text)
{
  if (text.empty() || text.front() != '/') {
    return std::nullopt;
  }
  TaskPath path;
  if (text == "/") {
    return path;
  }
  std::size_t pos = 1;
  while (pos <= text.size()) {
    const std::size_t next = std::min(text.find('/', pos), text.size());
    const std::string_view seg = text.substr(pos, next - pos);
    const std::size_t dot = seg.rfind('.');
    if (dot == std::string_view::npos || dot == 0) {
      return std::nullopt;
    }
    int occurrence = 0;
    const auto digits = seg.substr(dot + 1);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), occurrence);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || occurrence < 1) {
      return std::nullopt;
    }
    path.push_back(PathSegment{std::string(seg.substr(0, dot)), occurrence});
    pos = next + 1;
  }
  return path;
}

bool path_has_prefix(const TaskPath & path, const TaskPath & prefix)
{
  return prefix.size() <= path.size() && std::equal(prefix.begin(), prefix.end(), path.begin());
}

std::string_view to_string(TaskStatus status)
{
  switch (status) {
    case TaskStatus::created: return "created";
    case TaskStatus::running: return "running";
    case TaskStatus::suspended: return "suspended";
    case TaskStatus::succeeded: return "succeeded";
    case TaskStatus::evaporated: return "evaporated";
    case TaskStatus::failed: return "failed";
  }
  return "unknown";
}

std::optional<TaskStatus> parse_status(std::string_view text)
{
  for (auto s : {TaskStatus::created, TaskStatus::running, TaskStatus::suspended,
      TaskStatus::succeeded, TaskStatus::evaporated, TaskStatus::failed})
  {
    if (to_string(s) == text) {
      return s;
    }
  }
  return std::nullopt;
}

bool legal_transition(TaskStatus from, TaskStatus to)
{
  switch (from) {
    case TaskStatus::created:
      return to == TaskStatus::running;
    case TaskStatus::running:
      return to == TaskStatus::succeeded || to == TaskStatus::failed ||
             to == TaskStatus::evaporated || to == TaskStatus::suspended;
    case TaskStatus::suspended:
      return to == TaskStatus::running;
    default:
      return false;
  }
}

bool is_terminal(TaskStatus status)
{
  return status == TaskStatus::succeeded || status == TaskStatus::failed ||
         status == TaskStatus::evaporated;
}

const TaskNode * TaskTree::node_at(const TaskPath & path) const
{
  const auto it = index_.find(path);
  return it == index_.end() ? nullptr : &nodes_[it->second];
}

std::vector<const TaskNode *> TaskTree::document_order(const TaskPath & from) const
{
  std::vector<const TaskNode *> out;
  const TaskNode * start = node_at(from);
  if (!start) {
    return out;
  }
  std::vector<const TaskNode *> stack{start};
  while (!stack.empty()) {
    const TaskNode * n = stack.back();
    stack.pop_back();
    out.push_back(n);
    for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) {
      stack.push_back(node_at(*it));
    }
  }
  return out;
}

bool TaskTree::finalized() const
{
  return std::all_of(
    nodes_.begin(), nodes_.end(), [](const TaskNode & n) {return is_terminal(n.status);});
}

bool TaskTree::operator==(const TaskTree & other) const
{
  if (nodes_.size() != other.nodes_.size()) {
    return false;
  }
  for (const auto & n : nodes_) {
    const TaskNode * m = other.node_at(n.path);
    if (!m || !(*m == n)) {
      return false;
    }
  }
  return true;
}

TaskRecorder::TaskRecorder(std::vector<Description> root_parameters)
{
  TaskNode root;
  root.code_label = "root";
  root.parameters = std::move(root_parameters);
  root.created_at = tick();
  root.status = TaskStatus::running;
  root.started_at = tick();
  tree_.nodes_.push_back(std::move(root));
  tree_.index_.emplace(TaskPath{}, 0);
}

TaskNode & TaskRecorder::mutable_node(TaskHandle handle)
{
  if (handle.index >= tree_.nodes_.size()) {
    throw std::out_of_range("unknown task handle");
  }
  return tree_.nodes_[handle.index];
}

const TaskNode & TaskRecorder::node(TaskHandle handle) const
{
  if (handle.index >= tree_.nodes_.size()) {
    throw std::out_of_range("unknown task handle");
  }
  return tree_.nodes_[handle.index];
}

LogicalTime TaskRecorder::tick()
{
  return ++clock_;
}

void TaskRecorder::transition(TaskNode & node, TaskStatus to)
{
  if (!legal_transition(node.status, to)) {
    throw IllegalTransition(
            "task " + to_string(node.path) + ": illegal transition " +
            std::string(to_string(node.status)) + " -> " + std::string(to_string(to)));
  }
  node.status = to;
}

TaskHandle TaskRecorder::open_task(std::string label, std::vector<Description> parameters)
{
  return open_task_under(current_, std::move(label), std::move(parameters));
}

TaskHandle TaskRecorder::open_task_under(
  TaskHandle parent, std::string label, std::vector<Description> parameters)
{
  if (finalized_) {
    throw IllegalTransition("recorder already finalized");
  }
  if (label.empty() || label.find('/') != std::string::npos) {
    throw InvalidArgument("task labels must be non-empty and contain no '/'");
  }
  const TaskNode & p = node(parent);
  if (p.status != TaskStatus::running) {
    throw IllegalTransition("cannot open a task under non-running " + to_string(p.path));
  }
  int occurrence = 1;
  for (const auto & c : p.children) {
    if (c.back().label == label) {
      ++occurrence;
    }
  }
  TaskNode n;
  n.path = p.path;
  n.path.push_back(PathSegment{label, occurrence});
  n.parent = p.path;
  n.code_label = std::move(label);
  n.parameters = std::move(parameters);
  n.created_at = tick();
  transition(n, TaskStatus::running);
  n.started_at = tick();

  const TaskHandle h{tree_.nodes_.size()};
  mutable_node(parent).children.push_back(n.path);
  tree_.index_.emplace(n.path, h.index);
  tree_.nodes_.push_back(std::move(n));
  current_ = h;
  return h;
}

void TaskRecorder::close_task(TaskHandle handle, TaskResult res)
{
  if (finalized_) {
    throw IllegalTransition("recorder already finalized");
  }
  TaskNode & n = mutable_node(handle);
  if (const auto * s = std::get_if<result::Succeeded>(&res)) {
    if (s->grounded && !n.parameters.empty() &&
      !designator::is_prefix_of(n.parameters.front(), *s->grounded))
    {
      throw designator::OverrideAttempt(
              "task " + to_string(n.path) + ": outcome does not extend the task's description");
    }
  }
  for (const auto & child : n.children) {
    if (!is_terminal(tree_.nodes_[tree_.index_.at(child)].status)) {
      throw IllegalTransition("task " + to_string(n.path) + " still has open subtask " + to_string(child));
    }
  }
  if (n.status == TaskStatus::suspended) {
    transition(n, TaskStatus::running);
  }
  std::visit(
    [&](auto && r) {
      using T = std::decay_t<decltype(r)>;
      if constexpr (std::is_same_v<T, result::Succeeded>) {
        transition(n, TaskStatus::succeeded);
        if (r.grounded) {
          n.outcome = Outcome{std::move(*r.grounded)};
        }
      } else if constexpr (std::is_same_v<T, result::Failed>) {
        transition(n, TaskStatus::failed);
        n.outcome = Outcome{r.failure};
        n.failure = std::move(r.failure);
      } else {
        transition(n, TaskStatus::evaporated);
      }
    },
    std::move(res));
  n.ended_at = tick();
  if (n.parent) {
    current_ = TaskHandle{tree_.index_.at(*n.parent)};
  }
}

void TaskRecorder::suspend(TaskHandle handle)
{
  transition(mutable_node(handle), TaskStatus::suspended);
  tick();
}

void TaskRecorder::resume(TaskHandle handle)
{
  transition(mutable_node(handle), TaskStatus::running);
  tick();
}

void TaskRecorder::set_current(TaskHandle handle)
{
  node(handle);
  current_ = handle;
}

TaskTree TaskRecorder::finalize()
{
  if (finalized_) {
    return tree_;
  }
  for (std::size_t i = 1; i < tree_.nodes_.size(); ++i) {
    if (!is_terminal(tree_.nodes_[i].status)) {
      throw IllegalTransition("task " + to_string(tree_.nodes_[i].path) + " is still open");
    }
  }
  if (!is_terminal(tree_.nodes_[0].status)) {
    close_task(root(), result::Succeeded{});
  }
  finalized_ = true;
  return tree_;
}

// ---------------------------------------------------------------------------
// Serialization

json to_json(const designator::Value & value)
{
  using namespace designator;
  return std::visit(
    [](const auto & v) -> json {
      using T = std::decay_t<decltype(v)>;
      if constexpr (std::is_same_v<T, Symbol>) {
        return json{{"symbol", v.name}};
      } else if constexpr (std::is_same_v<T, double>) {
        return json{{"number", v}};
      } else if constexpr (std::is_same_v<T, Pose2D>) {
        return json{{"pose2d", json::array({v.x, v.y, v.theta})}};
      } else if constexpr (std::is_same_v<T, Pose3D>) {
        return json{{"pose3d", json::array({v.x, v.y, v.z, v.yaw})}};
      } else if constexpr (std::is_same_v<T, KeyPoseTrajectory>) {
        json arr = json::array();
        for (const auto & kp : v.poses()) {
          arr.push_back(json{
              {"label", to_string(kp.label)},
              {"pose", json::array({kp.pose.x, kp.pose.y, kp.pose.z, kp.pose.yaw})}});
        }
        return json{{"trajectory", arr}};
      } else {
        return json{{"description", to_json(*v)}};
      }
    },
    value);
}

json to_json(const Description & desc)
{
  json props = json::array();
  for (const auto & p : desc.properties()) {
    props.push_back(json::array({p.key, to_json(p.value)}));
  }
  return json{
    {"kind", designator::to_string(desc.kind())},
    {"quantifier", designator::to_string(desc.quantifier())},
    {"properties", props}};
}

json to_json(const Failure & failure)
{
  return json{{"kind", to_string(failure.kind)}, {"context", failure.context}};
}

namespace
{

[[noreturn]] void malformed(const std::string & what)
{
  throw MalformedTrace("malformed trace: " + what);
}

double number_at(const json & arr, std::size_t i)
{
  if (!arr.is_array() || i >= arr.size() || !arr[i].is_number()) {
    malformed("expected numeric array element");
  }
  return arr[i].get<double>();
}

Pose3D pose3d_from(const json & arr)
{
  if (!arr.is_array() || arr.size() != 4) {
    malformed("pose3d needs 4 numbers");
  }
  return Pose3D{number_at(arr, 0), number_at(arr, 1), number_at(arr, 2), number_at(arr, 3)};
}

const json & field(const json & j, const char * key)
{
  if (!j.is_object() || !j.contains(key)) {
    malformed(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

std::string string_field(const json & j, const char * key)
{
  const json & f = field(j, key);
  if (!f.is_string()) {
    malformed(std::string("field '") + key + "' must be a string");
  }
  return f.get<std::string>();
}

std::optional<LogicalTime> time_field(const json & j, const char * key)
{
  const json & f = field(j, key);
  if (f.is_null()) {
    return std::nullopt;
  }
  if (!f.is_number_unsigned()) {
    malformed(std::string("field '") + key + "' must be a non-negative integer");
  }
  return f.get<LogicalTime>();
}

json path_to_json(const TaskPath & path)
{
  json arr = json::array();
  for (const auto & seg : path) {
    arr.push_back(json::array({seg.label, seg.occurrence}));
  }
  return arr;
}

TaskPath path_from_json(const json & j)
{
  if (!j.is_array()) {
    malformed("path must be an array");
  }
  TaskPath path;
  for (const auto & seg : j) {
    if (!seg.is_array() || seg.size() != 2 || !seg[0].is_string() || !seg[1].is_number_integer()) {
      malformed("path segment must be [label, occurrence]");
    }
    const int occ = seg[1].get<int>();
    if (occ < 1) {
      malformed("occurrence must be >= 1");
    }
    path.push_back(PathSegment{seg[0].get<std::string>(), occ});
  }
  return path;
}

json optional_time(const std::optional<LogicalTime> & t)
{
  return t ? json(*t) : json(nullptr);
}

}  // namespace

designator::Value value_from_json(const json & j)
{
  using namespace designator;
  if (!j.is_object() || j.size() != 1) {
    malformed("value must be a single-key object");
  }
  const auto & [tag, body] = *j.items().begin();
  if (tag == "symbol") {
    if (!body.is_string()) {
      malformed("symbol must be a string");
    }
    return Symbol{body.get<std::string>()};
  }
  if (tag == "number") {
    if (!body.is_number()) {
      malformed("number must be numeric");
    }
    return body.get<double>();
  }
  if (tag == "pose2d") {
    if (!body.is_array() || body.size() != 3) {
      malformed("pose2d needs 3 numbers");
    }
    return Pose2D{number_at(body, 0), number_at(body, 1), number_at(body, 2)};
  }
  if (tag == "pose3d") {
    return pose3d_from(body);
  }
  if (tag == "trajectory") {
    if (!body.is_array()) {
      malformed("trajectory must be an array");
    }
    std::vector<KeyPose> poses;
    for (const auto & kp : body) {
      const auto label = parse_key_pose_label(string_field(kp, "label"));
      if (!label) {
        malformed("unknown key pose label");
      }
      poses.push_back(KeyPose{*label, pose3d_from(field(kp, "pose"))});
    }
    try {
      return KeyPoseTrajectory(std::move(poses));
    } catch (const InvalidArgument & e) {
      malformed(e.what());
    }
  }
  if (tag == "description") {
    return std::make_shared<const Description>(description_from_json(body));
  }
  malformed("unknown value tag '" + tag + "'");
}

Description description_from_json(const json & j)
{
  using namespace designator;
  const auto kind = parse_kind(string_field(j, "kind"));
  const auto quantifier = parse_quantifier(string_field(j, "quantifier"));
  if (!kind || !quantifier) {
    malformed("bad description kind or quantifier");
  }
  const json & props = field(j, "properties");
  if (!props.is_array()) {
    malformed("properties must be an array");
  }
  std::vector<Property> properties;
  for (const auto & p : props) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_string()) {
      malformed("property must be [key, value]");
    }
    properties.push_back(Property{p[0].get<std::string>(), value_from_json(p[1])});
  }
  try {
    return make_description(*kind, *quantifier, std::move(properties));
  } catch (const std::exception & e) {
    malformed(e.what());
  }
}

Failure failure_from_json(const json & j)
{
  const auto kind = parse_failure_kind(string_field(j, "kind"));
  if (!kind) {
    malformed("unknown failure kind");
  }
  return Failure{*kind, string_field(j, "context")};
}

std::string serialize_tree(const TaskTree & tree)
{
  if (!tree.finalized()) {
    throw IllegalTransition("cannot serialize a tree with open tasks");
  }
  json nodes = json::array();
  for (const TaskNode * n : tree.document_order()) {
    json children = json::array();
    for (const auto & c : n->children) {
      children.push_back(path_to_json(c));
    }
    json params = json::array();
    for (const auto & p : n->parameters) {
      params.push_back(to_json(p));
    }
    json outcome = nullptr;
    if (n->outcome) {
      if (const auto * d = std::get_if<Description>(&*n->outcome)) {
        outcome = json{{"description", to_json(*d)}};
      } else {
        outcome = json{{"failure", to_json(std::get<Failure>(*n->outcome))}};
      }
    }
    nodes.push_back(json{
        {"path", path_to_json(n->path)},
        {"status", to_string(n->status)},
        {"parent", n->parent ? path_to_json(*n->parent) : json(nullptr)},
        {"children", children},
        {"code_label", n->code_label},
        {"parameters", params},
        {"outcome", outcome},
        {"failure", n->failure ? to_json(*n->failure) : json(nullptr)},
        {"created_at", optional_time(n->created_at)},
        {"started_at", optional_time(n->started_at)},
        {"ended_at", optional_time(n->ended_at)}});
  }
  const json doc{{"format", "fetchproj-task-tree"}, {"version", 1}, {"nodes", nodes}};
  return doc.dump(1) + "\n";
}

TaskTree deserialize_tree(std::string_view bytes)
{
  json doc;
  try {
    doc = json::parse(bytes.begin(), bytes.end());
  } catch (const json::parse_error & e) {
    malformed(e.what());
  }
  if (string_field(doc, "format") != "fetchproj-task-tree") {
    malformed("unexpected format tag");
  }
  const json & version = field(doc, "version");
  if (!version.is_number_integer() || version.get<int>() != 1) {
    malformed("unsupported version");
  }
  const json & nodes = field(doc, "nodes");
  if (!nodes.is_array() || nodes.empty()) {
    malformed("nodes must be a non-empty array");
  }
  TaskTree tree;
  for (const auto & jn : nodes) {
    TaskNode n;
    n.path = path_from_json(field(jn, "path"));
    const auto status = parse_status(string_field(jn, "status"));
    if (!status) {
      malformed("unknown status");
    }
    n.status = *status;
    const json & parent = field(jn, "parent");
    if (!parent.is_null()) {
      n.parent = path_from_json(parent);
    }
    const json & children = field(jn, "children");
    if (!children.is_array()) {
      malformed("children must be an array");
    }
    for (const auto & c : children) {
      n.children.push_back(path_from_json(c));
    }
    n.code_label = string_field(jn, "code_label");
    const json & params = field(jn, "parameters");
    if (!params.is_array()) {
      malformed("parameters must be an array");
    }
    for (const auto & p : params) {
      n.parameters.push_back(description_from_json(p));
    }
    const json & outcome = field(jn, "outcome");
    if (!outcome.is_null()) {
      if (outcome.contains("description")) {
        n.outcome = Outcome{description_from_json(outcome.at("description"))};
      } else if (outcome.contains("failure")) {
        n.outcome = Outcome{failure_from_json(outcome.at("failure"))};
      } else {
        malformed("outcome must hold a description or a failure");
      }
    }
    const json & failure = field(jn, "failure");
    if (!failure.is_null()) {
      n.failure = failure_from_json(failure);
    }
    n.created_at = time_field(jn, "created_at");
    n.started_at = time_field(jn, "started_at");
    n.ended_at = time_field(jn, "ended_at");

    if (n.failure.has_value() != (n.status == TaskStatus::failed)) {
      malformed("failure must be present exactly for failed tasks");
    }
    if (tree.index_.count(n.path)) {
      malformed("duplicate path " + to_string(n.path));
    }
    tree.index_.emplace(n.path, tree.nodes_.size());
    tree.nodes_.push_back(std::move(n));
  }
  // Structural checks: a single root first, consistent parent/child links.
  if (!tree.nodes_.front().path.empty()) {
    malformed("first node must be the root");
  }
  for (const auto & n : tree.nodes_) {
    if (n.path.empty()) {
      if (n.parent) {
        malformed("root cannot have a parent");
      }
    } else {
      const TaskPath expected(n.path.begin(), n.path.end() - 1);
      if (!n.parent || *n.parent != expected || !tree.node_at(expected)) {
        malformed("bad parent link at " + to_string(n.path));
      }
      const auto & siblings = tree.node_at(expected)->children;
      if (std::find(siblings.begin(), siblings.end(), n.path) == siblings.end()) {
        malformed("parent does not list child " + to_string(n.path));
      }
    }
    for (const auto & c : n.children) {
      if (!tree.node_at(c) || c.size() != n.path.size() + 1 || !path_has_prefix(c, n.path)) {
        malformed("bad child link at " + to_string(n.path));
      }
    }
  }
  return tree;
}

}  // namespace fetchproj::tasktree
