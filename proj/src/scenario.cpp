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

#include "fetchproj/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "fetchproj/introspect.hpp"

namespace fetchproj::scenario
{

using nlohmann::json;

namespace
{

[[noreturn]] void config_error(const std::string & where, const std::string & what)
{
  throw ConfigError(where + ": " + what);
}

void check_keys(const json & j, const std::string & where, std::initializer_list<const char *> allowed)
{
  if (!j.is_object()) {
    config_error(where, "expected an object");
  }
  for (const auto & [key, value] : j.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char * a) {return key == a;})) {
      config_error(where, "unknown key '" + key + "'");
    }
  }
}

const json & need(const json & j, const std::string & where, const char * key)
{
  if (!j.is_object() || !j.contains(key)) {
    config_error(where, std::string("missing key '") + key + "'");
  }
  return j.at(key);
}

double number(const json & j, const std::string & where)
{
  if (!j.is_number()) {
    config_error(where, "expected a number");
  }
  return j.get<double>();
}

double number_or(const json & j, const std::string & where, const char * key, double fallback)
{
  return j.contains(key) ? number(j.at(key), where + "." + key) : fallback;
}

int int_or(const json & j, const std::string & where, const char * key, int fallback)
{
  if (!j.contains(key)) {
    return fallback;
  }
  const json & v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 1000000) {
    config_error(where + "." + key, "expected a non-negative integer");
  }
  return v.get<int>();
}

std::string text(const json & j, const std::string & where)
{
  if (!j.is_string() || j.get<std::string>().empty()) {
    config_error(where, "expected a non-empty string");
  }
  return j.get<std::string>();
}

std::vector<double> numbers(const json & j, const std::string & where, std::size_t n)
{
  if (!j.is_array() || j.size() != n) {
    config_error(where, "expected an array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Pose3D pose3d(const json & j, const std::string & where)
{
  const auto v = numbers(j, where, 4);
  return make_pose3d(v[0], v[1], v[2], v[3]);
}

geom::Rect rect(const json & j, const std::string & where)
{
  const auto v = numbers(j, where, 4);
  if (!(v[0] < v[2] && v[1] < v[3])) {
    config_error(where, "rectangle must be [x_min, y_min, x_max, y_max] with positive extent");
  }
  return geom::Rect{v[0], v[1], v[2], v[3]};
}

json to_array(const Pose3D & p) {return json::array({p.x, p.y, p.z, p.yaw});}
json to_array(const geom::Rect & r) {return json::array({r.x_min, r.y_min, r.x_max, r.y_max});}

void parse_world(const json & j, ScenarioConfig & c)
{
  check_keys(j, "world", {"bounds", "bodies", "objects", "robot"});
  c.bounds = rect(need(j, "world", "bounds"), "world.bounds");

  const json & bodies = need(j, "world", "bodies");
  if (!bodies.is_array()) {
    config_error("world.bodies", "expected an array");
  }
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    const std::string where = "world.bodies[" + std::to_string(i) + "]";
    const json & b = bodies[i];
    check_keys(b, where, {"name", "kind", "footprint", "z"});
    const auto kind = geom::parse_body_kind(text(need(b, where, "kind"), where + ".kind"));
    if (!kind || *kind == geom::BodyKind::object) {
      config_error(where + ".kind", "must be 'furniture' or 'surface'");
    }
    const auto z = numbers(need(b, where, "z"), where + ".z", 2);
    try {
      c.bodies.push_back(
        geom::make_body(
          text(need(b, where, "name"), where + ".name"),
          rect(need(b, where, "footprint"), where + ".footprint"), z[0], z[1], *kind));
    } catch (const std::exception & e) {
      config_error(where, e.what());
    }
  }

  const json & objects = need(j, "world", "objects");
  if (!objects.is_array()) {
    config_error("world.objects", "expected an array");
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string where = "world.objects[" + std::to_string(i) + "]";
    const json & o = objects[i];
    check_keys(o, where, {"name", "type", "pose", "dims"});
    const auto d = numbers(need(o, where, "dims"), where + ".dims", 3);
    if (d[0] <= 0 || d[1] <= 0 || d[2] <= 0) {
      config_error(where + ".dims", "dimensions must be positive");
    }
    c.objects.push_back(
      ObjectSpec{
        text(need(o, where, "name"), where + ".name"),
        text(need(o, where, "type"), where + ".type"),
        pose3d(need(o, where, "pose"), where + ".pose"),
        geom::Dimensions{d[0], d[1], d[2]}});
  }

  const json & robot = need(j, "world", "robot");
  check_keys(robot, "world.robot", {"base", "geometry"});
  const auto base = numbers(need(robot, "world.robot", "base"), "world.robot.base", 3);
  c.robot_start = make_pose2d(base[0], base[1], base[2]);
  if (robot.contains("geometry")) {
    const json & g = robot.at("geometry");
    const std::string where = "world.robot.geometry";
    check_keys(
      g, where,
      {"base_radius", "shoulder_lateral", "shoulder_height", "eye_height", "reach_min", "reach_max",
        "band_lo", "band_hi", "max_approach_angle", "max_head_yaw", "max_gripper_opening"});
    auto & G = c.geometry;
    G.base_radius = number_or(g, where, "base_radius", G.base_radius);
    G.shoulder_lateral = number_or(g, where, "shoulder_lateral", G.shoulder_lateral);
    G.shoulder_height = number_or(g, where, "shoulder_height", G.shoulder_height);
    G.eye_height = number_or(g, where, "eye_height", G.eye_height);
    G.reach_min = number_or(g, where, "reach_min", G.reach_min);
    G.reach_max = number_or(g, where, "reach_max", G.reach_max);
    G.band_lo = number_or(g, where, "band_lo", G.band_lo);
    G.band_hi = number_or(g, where, "band_hi", G.band_hi);
    G.max_approach_angle = number_or(g, where, "max_approach_angle", G.max_approach_angle);
    G.max_head_yaw = number_or(g, where, "max_head_yaw", G.max_head_yaw);
    G.max_gripper_opening = number_or(g, where, "max_gripper_opening", G.max_gripper_opening);
    if (G.base_radius <= 0 || G.reach_min < 0 || G.reach_min >= G.reach_max || G.band_lo >= G.band_hi) {
      config_error(where, "inconsistent robot geometry");
    }
  }
}

void parse_parameter_table(const json & j, ScenarioConfig & c)
{
  if (!j.is_object()) {
    config_error("parameter_table", "expected an object");
  }
  for (const auto & [type, entry] : j.items()) {
    const std::string where = "parameter_table." + type;
    check_keys(entry, where, {"grasps", "gripper_opening", "grasping_force", "standoff"});
    designator::ObjectParams p;
    if (const auto it = c.plan.parameters.find(type); it != c.plan.parameters.end()) {
      p = it->second;
    }
    if (entry.contains("grasps")) {
      const json & g = entry.at("grasps");
      if (!g.is_array() || g.empty()) {
        config_error(where + ".grasps", "expected a non-empty array");
      }
      p.grasps.clear();
      for (const auto & name : g) {
        const auto grasp = parse_grasp(text(name, where + ".grasps"));
        if (!grasp) {
          config_error(where + ".grasps", "unknown grasp type");
        }
        p.grasps.push_back(*grasp);
      }
    }
    p.gripper_opening = number_or(entry, where, "gripper_opening", p.gripper_opening);
    p.grasping_force = number_or(entry, where, "grasping_force", p.grasping_force);
    p.standoff = number_or(entry, where, "standoff", p.standoff);
    if (p.grasps.empty() || p.gripper_opening <= 0 || p.standoff < 0) {
      config_error(where, "incomplete or invalid parameters");
    }
    c.plan.parameters[type] = p;
  }
}

void validate(const ScenarioConfig & c)
{
  std::set<std::string> names;
  for (const auto & o : c.objects) {
    if (!names.insert(o.name).second) {
      config_error("world.objects", "duplicate object name '" + o.name + "'");
    }
    if (!c.plan.parameters.count(o.type)) {
      config_error("world.objects", "no parameters for object type '" + o.type + "'");
    }
    if (!c.bounds.contains(o.pose.x, o.pose.y)) {
      config_error("world.objects", "object '" + o.name + "' lies outside the world bounds");
    }
  }
  std::vector<std::string> order = c.object_order;
  std::sort(order.begin(), order.end());
  if (order != std::vector<std::string>(names.begin(), names.end())) {
    config_error("object_order", "must be a permutation of the declared objects");
  }
  const auto surface = [&](const std::string & name) {
      return std::any_of(
        c.bodies.begin(), c.bodies.end(),
        [&](const geom::Body & b) {return b.name == name && b.kind == geom::BodyKind::surface;});
    };
  if (!surface(c.search_surface)) {
    config_error("search_location", "unknown surface '" + c.search_surface + "'");
  }
  if (!surface(c.delivery_surface)) {
    config_error("delivery.surface", "unknown surface '" + c.delivery_surface + "'");
  }
  for (const auto & name : c.object_order) {
    const auto it = c.goals.find(name);
    if (it == c.goals.end()) {
      config_error("delivery.goals", "no goal for '" + name + "'");
    }
    if (!c.bounds.contains(it->second.x, it->second.y)) {
      config_error("delivery.goals", "goal of '" + name + "' lies outside the world bounds");
    }
  }
  if (c.goals.size() != names.size()) {
    config_error("delivery.goals", "goals must name declared objects only");
  }
  if (!c.bounds.contains(c.robot_start.x, c.robot_start.y)) {
    config_error("world.robot.base", "robot starts outside the world bounds");
  }
  const auto & r = c.plan.retries;
  if (r.search < 1 || r.fetch < 1 || r.deliver_outer < 1 || r.deliver_inner < 1 || r.sample_attempts < 1) {
    config_error("retries", "all retry limits must be at least 1");
  }
  if (c.projection.n_runs < 1) {
    config_error("projection.n_runs", "must be at least 1");
  }
  if (!projector::cost_function(c.projection.cost_fn)) {
    config_error("projection.cost_fn", "unknown cost function '" + c.projection.cost_fn + "'");
  }
  const auto & n = c.execution.noise;
  if (n.sigma < 0 || n.clip < 0 || n.p_flip < 0 || n.p_flip > 1) {
    config_error("noise", "invalid noise model");
  }
  try {
    (void)c.make_world();
  } catch (const std::exception & e) {
    config_error("world", e.what());
  }
}

}  // namespace

geom::WorldState ScenarioConfig::make_world() const
{
  std::vector<geom::ObjectInstance> objs;
  for (const auto & o : objects) {
    objs.push_back(geom::ObjectInstance{o.name, o.type, o.pose, o.dims, {}, std::nullopt});
  }
  geom::RobotState robot;
  robot.base = robot_start;
  robot.geometry = geometry;
  return geom::WorldState(bounds, bodies, std::move(objs), robot);
}

ScenarioConfig parse_config(const json & doc)
{
  check_keys(
    doc, "config",
    {"schema_version", "world", "search_location", "delivery", "object_order", "seed",
      "projection", "noise", "execution", "retries", "sampling", "parameter_table"});
  const json & version = need(doc, "config", "schema_version");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    config_error("schema_version", "unsupported (expected " + std::to_string(kSchemaVersion) + ")");
  }
  ScenarioConfig c;
  parse_world(need(doc, "config", "world"), c);
  c.search_surface = text(need(doc, "config", "search_location"), "search_location");

  const json & delivery = need(doc, "config", "delivery");
  check_keys(delivery, "delivery", {"surface", "goals"});
  c.delivery_surface = text(need(delivery, "delivery", "surface"), "delivery.surface");
  const json & goals = need(delivery, "delivery", "goals");
  if (!goals.is_object()) {
    config_error("delivery.goals", "expected an object");
  }
  for (const auto & [name, pose] : goals.items()) {
    c.goals[name] = pose3d(pose, "delivery.goals." + name);
  }

  const json & order = need(doc, "config", "object_order");
  if (!order.is_array()) {
    config_error("object_order", "expected an array");
  }
  for (const auto & name : order) {
    c.object_order.push_back(text(name, "object_order"));
  }

  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned()) {
      config_error("seed", "expected a non-negative integer");
    }
    c.seed = doc.at("seed").get<std::uint64_t>();
  }

  if (doc.contains("projection")) {
    const json & p = doc.at("projection");
    check_keys(p, "projection", {"enabled", "n_runs", "cost_fn"});
    if (p.contains("enabled")) {
      if (!p.at("enabled").is_boolean()) {
        config_error("projection.enabled", "expected a boolean");
      }
      c.projection.enabled = p.at("enabled").get<bool>();
    }
    c.projection.n_runs = int_or(p, "projection", "n_runs", c.projection.n_runs);
    if (p.contains("cost_fn")) {
      c.projection.cost_fn = text(p.at("cost_fn"), "projection.cost_fn");
    }
  }

  if (doc.contains("noise")) {
    const json & n = doc.at("noise");
    check_keys(
      n, "noise",
      {"sigma", "clip", "p_flip", "p_navigation_goal_not_reached", "p_manipulation_goal_not_reached"});
    auto & e = c.execution;
    e.noise.sigma = number_or(n, "noise", "sigma", e.noise.sigma);
    e.noise.clip = number_or(n, "noise", "clip", e.noise.clip);
    e.noise.p_flip = number_or(n, "noise", "p_flip", e.noise.p_flip);
    e.p_navigation_goal_not_reached = number_or(
      n, "noise", "p_navigation_goal_not_reached", e.p_navigation_goal_not_reached);
    e.p_manipulation_goal_not_reached = number_or(
      n, "noise", "p_manipulation_goal_not_reached", e.p_manipulation_goal_not_reached);
  }

  if (doc.contains("execution")) {
    const json & x = doc.at("execution");
    check_keys(x, "execution", {"control_rate", "base_speed", "base_turn_speed", "arm_speed", "head_speed",
        "real_time_factor"});
    auto & e = c.execution;
    e.control_rate = number_or(x, "execution", "control_rate", e.control_rate);
    e.base_speed = number_or(x, "execution", "base_speed", e.base_speed);
    e.base_turn_speed = number_or(x, "execution", "base_turn_speed", e.base_turn_speed);
    e.arm_speed = number_or(x, "execution", "arm_speed", e.arm_speed);
    e.head_speed = number_or(x, "execution", "head_speed", e.head_speed);
    e.real_time_factor = number_or(x, "execution", "real_time_factor", e.real_time_factor);
    if (e.control_rate <= 0 || e.base_speed <= 0 || e.base_turn_speed <= 0 || e.arm_speed <= 0 ||
      e.head_speed <= 0)
    {
      config_error("execution", "rates and speeds must be positive");
    }
    if (e.real_time_factor < 0) {
      config_error("execution", "real_time_factor must not be negative");
    }
  }

  if (doc.contains("retries")) {
    const json & r = doc.at("retries");
    check_keys(r, "retries", {"search", "fetch", "deliver_outer", "deliver_inner", "sample_attempts"});
    auto & R = c.plan.retries;
    R.search = int_or(r, "retries", "search", R.search);
    R.fetch = int_or(r, "retries", "fetch", R.fetch);
    R.deliver_outer = int_or(r, "retries", "deliver_outer", R.deliver_outer);
    R.deliver_inner = int_or(r, "retries", "deliver_inner", R.deliver_inner);
    R.sample_attempts = int_or(r, "retries", "sample_attempts", R.sample_attempts);
  }

  if (doc.contains("sampling")) {
    const json & s = doc.at("sampling");
    check_keys(
      s, "sampling",
      {"fetch_radius", "search_radius", "deliver_radius", "placement_jitter", "max_grasp_combos"});
    auto & P = c.plan;
    const auto band = [&](const char * key, double & lo, double & hi) {
        if (s.contains(key)) {
          const auto v = numbers(s.at(key), std::string("sampling.") + key, 2);
          if (v[0] < 0 || v[0] > v[1]) {
            config_error(std::string("sampling.") + key, "expected [min, max] with 0 <= min <= max");
          }
          lo = v[0];
          hi = v[1];
        }
      };
    band("fetch_radius", P.fetch_radius_min, P.fetch_radius_max);
    band("search_radius", P.search_radius_min, P.search_radius_max);
    band("deliver_radius", P.deliver_radius_min, P.deliver_radius_max);
    P.placement_jitter = number_or(s, "sampling", "placement_jitter", P.placement_jitter);
    P.max_grasp_combos = int_or(s, "sampling", "max_grasp_combos", P.max_grasp_combos);
  }

  if (doc.contains("parameter_table")) {
    parse_parameter_table(doc.at("parameter_table"), c);
  }
  validate(c);
  return c;
}

ScenarioConfig load_config(const std::filesystem::path & file)
{
  std::ifstream in(file);
  if (!in) {
    throw ConfigError("cannot open scenario file " + file.string());
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error & e) {
    throw ConfigError(file.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json config_to_json(const ScenarioConfig & c)
{
  json bodies = json::array();
  for (const auto & b : c.bodies) {
    bodies.push_back(
      {{"name", b.name}, {"kind", geom::to_string(b.kind)}, {"footprint", to_array(b.footprint)},
        {"z", json::array({b.z_lo, b.z_hi})}});
  }
  json objects = json::array();
  for (const auto & o : c.objects) {
    objects.push_back(
      {{"name", o.name}, {"type", o.type}, {"pose", to_array(o.pose)},
        {"dims", json::array({o.dims.dx, o.dims.dy, o.dims.dz})}});
  }
  const auto & G = c.geometry;
  json goals = json::object();
  for (const auto & [name, pose] : c.goals) {
    goals[name] = to_array(pose);
  }
  json table = json::object();
  for (const auto & [type, p] : c.plan.parameters) {
    json grasps = json::array();
    for (auto g : p.grasps) {
      grasps.push_back(to_string(g));
    }
    table[type] = {
      {"grasps", grasps}, {"gripper_opening", p.gripper_opening},
      {"grasping_force", p.grasping_force}, {"standoff", p.standoff}};
  }
  const auto & e = c.execution;
  const auto & P = c.plan;
  return json{
    {"schema_version", kSchemaVersion},
    {"world", {
        {"bounds", to_array(c.bounds)}, {"bodies", bodies}, {"objects", objects},
        {"robot", {
            {"base", json::array({c.robot_start.x, c.robot_start.y, c.robot_start.theta})},
            {"geometry", {
                {"base_radius", G.base_radius}, {"shoulder_lateral", G.shoulder_lateral},
                {"shoulder_height", G.shoulder_height}, {"eye_height", G.eye_height},
                {"reach_min", G.reach_min}, {"reach_max", G.reach_max}, {"band_lo", G.band_lo},
                {"band_hi", G.band_hi}, {"max_approach_angle", G.max_approach_angle},
                {"max_head_yaw", G.max_head_yaw}, {"max_gripper_opening", G.max_gripper_opening}}}}}}},
    {"search_location", c.search_surface},
    {"delivery", {{"surface", c.delivery_surface}, {"goals", goals}}},
    {"object_order", c.object_order},
    {"seed", c.seed},
    {"projection", {
        {"enabled", c.projection.enabled}, {"n_runs", c.projection.n_runs},
        {"cost_fn", c.projection.cost_fn}}},
    {"noise", {
        {"sigma", e.noise.sigma}, {"clip", e.noise.clip}, {"p_flip", e.noise.p_flip},
        {"p_navigation_goal_not_reached", e.p_navigation_goal_not_reached},
        {"p_manipulation_goal_not_reached", e.p_manipulation_goal_not_reached}}},
    {"execution", {
        {"control_rate", e.control_rate}, {"base_speed", e.base_speed},
        {"base_turn_speed", e.base_turn_speed}, {"arm_speed", e.arm_speed},
        {"head_speed", e.head_speed}, {"real_time_factor", e.real_time_factor}}},
    {"retries", {
        {"search", P.retries.search}, {"fetch", P.retries.fetch},
        {"deliver_outer", P.retries.deliver_outer}, {"deliver_inner", P.retries.deliver_inner},
        {"sample_attempts", P.retries.sample_attempts}}},
    {"sampling", {
        {"fetch_radius", json::array({P.fetch_radius_min, P.fetch_radius_max})},
        {"search_radius", json::array({P.search_radius_min, P.search_radius_max})},
        {"deliver_radius", json::array({P.deliver_radius_min, P.deliver_radius_max})},
        {"placement_jitter", P.placement_jitter}, {"max_grasp_combos", P.max_grasp_combos}}},
    {"parameter_table", table}};
}

FailureBucket bucket_of(tasktree::FailureKind kind)
{
  using tasktree::FailureKind;
  switch (kind) {
    case FailureKind::navigation_pose_in_collision:
    case FailureKind::manipulation_pose_in_collision:
      return FailureBucket::collision;
    case FailureKind::navigation_pose_unreachable:
    case FailureKind::manipulation_pose_unreachable:
    case FailureKind::object_unreachable:
      return FailureBucket::reachability;
    default:
      return FailureBucket::other;
  }
}

ObjectMetrics metrics_from_tree(const tasktree::TaskTree & tree)
{
  using tasktree::TaskStatus;
  ObjectMetrics m;
  m.runtime_steps = tree.root().ended_at.value_or(0);
  for (const tasktree::TaskNode * n : tree.document_order()) {
    if (n->code_label == "transporting" && !n->parameters.empty()) {
      if (const auto * obj = n->parameters.front().nested("object")) {
        m.object = obj->symbol("name").value_or(obj->type());
      }
      m.success = n->status == TaskStatus::succeeded;
    }
    if (n->code_label == "projecting" && n->status == TaskStatus::succeeded) {
      if (const auto * d = introspect::action_of(*n)) {
        const double * runs = d->get_as<double>("runs");
        const double * ok = d->get_as<double>("successful-runs");
        m.projection_runs = runs ? static_cast<int>(*runs) : 0;
        m.projection_successes = ok ? static_cast<int>(*ok) : 0;
      }
    }
    if (n->code_label == "picking-up" && n->status == TaskStatus::succeeded) {
      if (const auto * d = introspect::action_of(*n)) {
        if (auto a = d->symbol("arm")) {
          m.arm = parse_arm(*a);
        }
        if (auto g = d->symbol("grasp")) {
          m.grasp = parse_grasp(*g);
        }
      }
    }
    if (n->status != TaskStatus::failed || !n->failure) {
      continue;
    }
    const bool inherited = std::any_of(
      n->children.begin(), n->children.end(), [&](const tasktree::TaskPath & c) {
        const auto * child = tree.node_at(c);
        return child && child->status == TaskStatus::failed && child->failure == n->failure;
      });
    if (inherited) {
      continue;
    }
    switch (bucket_of(n->failure->kind)) {
      case FailureBucket::collision: ++m.collision_failures; break;
      case FailureBucket::reachability: ++m.reachability_failures; break;
      case FailureBucket::other: ++m.other_failures; break;
    }
  }
  return m;
}

ObjectMetrics RunMetrics::totals() const
{
  ObjectMetrics t;
  t.object = "total";
  t.success = !objects.empty();
  for (const auto & o : objects) {
    t.runtime_steps += o.runtime_steps;
    t.success = t.success && o.success;
    t.collision_failures += o.collision_failures;
    t.reachability_failures += o.reachability_failures;
    t.other_failures += o.other_failures;
    t.projection_successes += o.projection_successes;
    t.projection_runs += o.projection_runs;
  }
  return t;
}

RunResult run_scenario(const ScenarioConfig & config, std::uint64_t seed)
{
  geom::WorldState truth = config.make_world();
  geom::WorldState belief = truth;
  plans::Executor exec(truth, belief, config.execution, derive_seed(seed, 0));

  RunResult out;
  out.metrics.seed = seed;
  out.metrics.projection = config.projection.enabled;
  for (std::size_t i = 0; i < config.object_order.size(); ++i) {
    const std::string & name = config.object_order[i];
    const auto spec = std::find_if(
      config.objects.begin(), config.objects.end(), [&](const ObjectSpec & o) {return o.name == name;});
    const designator::Description object = designator::make_description(
      designator::Kind::object, designator::Quantifier::an,
      {designator::prop("type", designator::sym(spec->type)),
        designator::prop("name", designator::sym(name))});

    tasktree::TaskRecorder recorder({object});
    plans::PlanContext ctx{exec, recorder, config.plan};
    plans::ProjectionSettings projection = config.projection;
    projection.master_seed = derive_seed(seed, i + 1);
    const auto result = plans::plan_transport(
      ctx, object, plans::surface_location(config.search_surface),
      plans::placement_location(config.delivery_surface, config.goals.at(name)), projection);
    const tasktree::TaskTree tree = recorder.finalize();

    // A failed transport may leave the object in the gripper; put it back.
    for (geom::WorldState * w : {&truth, &belief}) {
      for (Arm a : {Arm::left, Arm::right}) {
        const auto & held = w->robot().arm(a).attachment;
        if (held && *held == name) {
          w->apply(geom::motion::Detach{a, spec->pose});
        }
      }
    }

    out.metrics.objects.push_back(metrics_from_tree(tree));
    out.traces.push_back(Trace{name, tasktree::serialize_tree(tree)});
    ObjectTiming timing{name, 0.0, result.execution_seconds, true};
    if (result.projection) {
      timing.projection_seconds = result.projection->projection_seconds;
      timing.belief_restored = result.projection->belief_restored;
    }
    out.timing.push_back(timing);
  }
  return out;
}

AggregateTable aggregate(const std::vector<RunMetrics> & runs)
{
  if (runs.empty()) {
    throw InvalidArgument("aggregate needs at least one run");
  }
  const auto summarize = [&](const std::string & label, auto && pick) {
      AggregateRow row;
      row.object = label;
      for (const auto & r : runs) {
        const ObjectMetrics m = pick(r);
        row.runtime_steps += static_cast<double>(m.runtime_steps);
        row.success_rate += m.success ? 1.0 : 0.0;
        row.collision_failures += m.collision_failures;
        row.reachability_failures += m.reachability_failures;
        row.failure_sum += m.failure_sum();
        row.projection_successes += m.projection_successes;
        row.projection_runs = std::max(row.projection_runs, m.projection_runs);
        ++row.attempts;
      }
      const double n = static_cast<double>(row.attempts);
      row.runtime_steps /= n;
      row.success_rate /= n;
      row.collision_failures /= n;
      row.reachability_failures /= n;
      row.failure_sum /= n;
      row.projection_successes /= n;
      return row;
    };
  AggregateTable table;
  for (std::size_t i = 0; i < runs.front().objects.size(); ++i) {
    const std::string name = runs.front().objects[i].object;
    table.objects.push_back(
      summarize(
        name, [&](const RunMetrics & r) {
          if (i >= r.objects.size() || r.objects[i].object != name) {
            throw InvalidArgument("runs disagree on the object order");
          }
          return r.objects[i];
        }));
  }
  table.total = summarize("total", [](const RunMetrics & r) {return r.totals();});
  // Success over all object attempts, not whole-scenario success.
  double delivered = 0.0;
  for (const auto & row : table.objects) {
    delivered += row.success_rate;
  }
  table.total.success_rate = table.objects.empty() ? 0.0 : delivered / static_cast<double>(table.objects.size());
  return table;
}

namespace
{

std::string cell(double v, int precision)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

std::string render(
  const std::vector<std::string> & header, const std::vector<std::vector<std::string>> & rows)
{
  std::vector<std::size_t> width(header.size(), 0);
  const auto fit = [&](const std::vector<std::string> & r) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        width[i] = std::max(width[i], r[i].size());
      }
    };
  fit(header);
  for (const auto & r : rows) {
    fit(r);
  }
  std::ostringstream os;
  const auto line = [&](const std::vector<std::string> & r) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i == 0) {
          os << r[i] << std::string(width[i] - r[i].size(), ' ');
        } else {
          os << "  " << std::string(width[i] - r[i].size(), ' ') << r[i];
        }
      }
      os << '\n';
    };
  line(header);
  for (const auto & r : rows) {
    line(r);
  }
  return os.str();
}

}  // namespace

std::string format_table(const RunMetrics & run)
{
  std::vector<ObjectMetrics> cols = run.objects;
  cols.push_back(run.totals());
  std::vector<std::string> header{""};
  std::vector<std::vector<std::string>> rows(8);
  rows[0] = {"Runtime (steps)"};
  rows[1] = {"Arm used"};
  rows[2] = {"Grasp used"};
  rows[3] = {"Success"};
  rows[4] = {"Coll. fail."};
  rows[5] = {"Reach. fail."};
  rows[6] = {"Sum"};
  rows[7] = {"Proj. success"};
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const ObjectMetrics & m = cols[i];
    const bool total = i + 1 == cols.size();
    header.push_back(m.object);
    rows[0].push_back(std::to_string(m.runtime_steps));
    rows[1].push_back(total || !m.arm ? "-" : std::string(to_string(*m.arm)));
    rows[2].push_back(total || !m.grasp ? "-" : std::string(to_string(*m.grasp)));
    if (total) {
      const auto ok = std::count_if(
        run.objects.begin(), run.objects.end(), [](const ObjectMetrics & o) {return o.success;});
      rows[3].push_back(std::to_string(ok) + " of " + std::to_string(run.objects.size()));
    } else {
      rows[3].push_back(m.success ? "yes" : "no");
    }
    rows[4].push_back(std::to_string(m.collision_failures));
    rows[5].push_back(std::to_string(m.reachability_failures));
    rows[6].push_back(std::to_string(m.failure_sum()));
    rows[7].push_back(
      m.projection_runs > 0 ?
      std::to_string(m.projection_successes) + " of " + std::to_string(m.projection_runs) : "-");
  }
  return render(header, rows);
}

std::string format_table(const AggregateTable & table)
{
  std::vector<AggregateRow> cols = table.objects;
  cols.push_back(table.total);
  std::vector<std::string> header{""};
  std::vector<std::vector<std::string>> rows(6);
  rows[0] = {"Runtime (steps)"};
  rows[1] = {"Success rate"};
  rows[2] = {"Coll. fail."};
  rows[3] = {"Reach. fail."};
  rows[4] = {"Sum"};
  rows[5] = {"Proj. success"};
  for (const auto & r : cols) {
    header.push_back(r.object);
    rows[0].push_back(cell(r.runtime_steps, 1));
    rows[1].push_back(cell(100.0 * r.success_rate, 0) + "%");
    rows[2].push_back(cell(r.collision_failures, 2));
    rows[3].push_back(cell(r.reachability_failures, 2));
    rows[4].push_back(cell(r.failure_sum, 2));
    rows[5].push_back(
      r.projection_runs > 0 ?
      cell(r.projection_successes, 2) + " of " + std::to_string(r.projection_runs) : "-");
  }
  return render(header, rows) + "(" + std::to_string(table.total.attempts) + " runs)\n";
}

namespace
{

json record(std::size_t run_index, const RunMetrics & run, const ObjectMetrics & m)
{
  return json{
    {"record", "object"},
    {"run", run_index},
    {"seed", run.seed},
    {"projection", run.projection},
    {"object", m.object},
    {"runtime_steps", m.runtime_steps},
    {"arm", m.arm ? json(to_string(*m.arm)) : json(nullptr)},
    {"grasp", m.grasp ? json(to_string(*m.grasp)) : json(nullptr)},
    {"success", m.success},
    {"collision_failures", m.collision_failures},
    {"reachability_failures", m.reachability_failures},
    {"other_failures", m.other_failures},
    {"failure_sum", m.failure_sum()},
    {"projection_successes", m.projection_successes},
    {"projection_runs", m.projection_runs}};
}

}  // namespace

std::string format_records(const std::vector<RunMetrics> & runs)
{
  std::string out;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (const auto & m : runs[i].objects) {
      out += record(i, runs[i], m).dump() + "\n";
    }
    json total = record(i, runs[i], runs[i].totals());
    total["record"] = "run-total";
    out += total.dump() + "\n";
  }
  return out;
}

std::string format_aggregate_record(const AggregateTable & table)
{
  std::string out;
  std::vector<AggregateRow> rows = table.objects;
  rows.push_back(table.total);
  for (const auto & r : rows) {
    out += json{
      {"record", "aggregate"},
      {"object", r.object},
      {"runs", r.attempts},
      {"runtime_steps", r.runtime_steps},
      {"success_rate", r.success_rate},
      {"collision_failures", r.collision_failures},
      {"reachability_failures", r.reachability_failures},
      {"failure_sum", r.failure_sum},
      {"projection_successes", r.projection_successes},
      {"projection_runs", r.projection_runs}}.dump() + "\n";
  }
  return out;
}

std::string format_timing(const std::vector<RunResult> & results)
{
  std::string out;
  for (std::size_t i = 0; i < results.size(); ++i) {
    for (const auto & t : results[i].timing) {
      out += json{
        {"run", i},
        {"object", t.object},
        {"projection_seconds", t.projection_seconds},
        {"execution_seconds", t.execution_seconds},
        {"belief_restored", t.belief_restored}}.dump() + "\n";
    }
  }
  return out;
}

std::string trace_file_name(std::size_t index, const std::string & object)
{
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02zu", index + 1);
  return std::string(buf) + "-" + object + ".trace.json";
}

}  // namespace fetchproj::scenario
