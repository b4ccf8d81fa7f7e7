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

#include "fetchproj/designator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace fetchproj::designator
{

std::string_view to_string(KeyPoseLabel label)
{
  switch (label) {
    case KeyPoseLabel::pre_grasp: return "pre-grasp";
    case KeyPoseLabel::grasp: return "grasp";
    case KeyPoseLabel::lift: return "lift";
    case KeyPoseLabel::pre_place: return "pre-place";
    case KeyPoseLabel::place: return "place";
    case KeyPoseLabel::retract: return "retract";
  }
  return "unknown";
}

std::optional<KeyPoseLabel> parse_key_pose_label(std::string_view text)
{
  for (auto l : {KeyPoseLabel::pre_grasp, KeyPoseLabel::grasp, KeyPoseLabel::lift,
      KeyPoseLabel::pre_place, KeyPoseLabel::place, KeyPoseLabel::retract})
  {
    if (to_string(l) == text) {
      return l;
    }
  }
  return std::nullopt;
}

KeyPoseTrajectory::KeyPoseTrajectory(std::vector<KeyPose> poses)
: poses_(std::move(poses))
{
  if (poses_.empty()) {
    throw InvalidArgument("key pose trajectory must not be empty");
  }
  for (std::size_t i = 1; i < poses_.size(); ++i) {
    if (static_cast<int>(poses_[i].label) <= static_cast<int>(poses_[i - 1].label)) {
      throw InvalidArgument(
              "key pose '" + std::string(to_string(poses_[i].label)) + "' out of order after '" +
              std::string(to_string(poses_[i - 1].label)) + "'");
    }
  }
}

const KeyPose * KeyPoseTrajectory::find(KeyPoseLabel label) const
{
  for (const auto & kp : poses_) {
    if (kp.label == label) {
      return &kp;
    }
  }
  return nullptr;
}

std::string_view to_string(Kind kind)
{
  switch (kind) {
    case Kind::action: return "action";
    case Kind::object: return "object";
    case Kind::location: return "location";
  }
  return "unknown";
}

std::string_view to_string(Quantifier q)
{
  switch (q) {
    case Quantifier::an: return "an";
    case Quantifier::a: return "a";
    case Quantifier::the: return "the";
  }
  return "unknown";
}

std::optional<Kind> parse_kind(std::string_view text)
{
  if (text == "action") {return Kind::action;}
  if (text == "object") {return Kind::object;}
  if (text == "location") {return Kind::location;}
  return std::nullopt;
}

std::optional<Quantifier> parse_quantifier(std::string_view text)
{
  if (text == "an") {return Quantifier::an;}
  if (text == "a") {return Quantifier::a;}
  if (text == "the") {return Quantifier::the;}
  return std::nullopt;
}

bool value_equal(const Value & a, const Value & b)
{
  if (a.index() != b.index()) {
    return false;
  }
  if (const auto * pa = std::get_if<DescriptionPtr>(&a)) {
    const auto & pb = std::get<DescriptionPtr>(b);
    if (!*pa || !pb) {
      return !*pa && !pb;
    }
    return **pa == *pb;
  }
  return a == b;
}

Description::Description(Kind kind, Quantifier quantifier, std::vector<Property> properties)
: kind_(kind), quantifier_(quantifier), properties_(std::move(properties))
{
}

const std::string & Description::type() const
{
  // make_description guarantees a symbolic type.
  return std::get<Symbol>(*get("type")).name;
}

const Value * Description::get(std::string_view key) const
{
  for (const auto & p : properties_) {
    if (p.key == key) {
      return &p.value;
    }
  }
  return nullptr;
}

std::optional<std::string> Description::symbol(std::string_view key) const
{
  if (const auto * s = get_as<Symbol>(key)) {
    return s->name;
  }
  return std::nullopt;
}

const Description * Description::nested(std::string_view key) const
{
  if (const auto * d = get_as<DescriptionPtr>(key)) {
    return d->get();
  }
  return nullptr;
}

bool Description::operator==(const Description & other) const
{
  if (kind_ != other.kind_ || quantifier_ != other.quantifier_ ||
    properties_.size() != other.properties_.size())
  {
    return false;
  }
  for (std::size_t i = 0; i < properties_.size(); ++i) {
    if (properties_[i].key != other.properties_[i].key ||
      !value_equal(properties_[i].value, other.properties_[i].value))
    {
      return false;
    }
  }
  return true;
}

Description make_description(Kind kind, Quantifier quantifier, std::vector<Property> properties)
{
  bool has_type = false;
  for (std::size_t i = 0; i < properties.size(); ++i) {
    if (properties[i].key.empty()) {
      throw InvalidArgument("property keys must not be empty");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (properties[j].key == properties[i].key) {
        throw DuplicateKey("duplicate property key '" + properties[i].key + "'");
      }
    }
    if (const auto * d = std::get_if<DescriptionPtr>(&properties[i].value); d && !*d) {
      throw InvalidArgument("nested description for '" + properties[i].key + "' is null");
    }
    if (properties[i].key == "type") {
      if (!std::holds_alternative<Symbol>(properties[i].value)) {
        throw MissingType("the type property must be a symbol");
      }
      has_type = true;
    }
  }
  if (!has_type) {
    throw MissingType("description has no type property");
  }
  return Description(kind, quantifier, std::move(properties));
}

Description extend(const Description & desc, std::vector<Property> new_properties)
{
  for (const auto & p : new_properties) {
    if (desc.has(p.key)) {
      throw OverrideAttempt("property '" + p.key + "' is already grounded");
    }
  }
  std::vector<Property> merged = desc.properties();
  merged.insert(
    merged.end(), std::make_move_iterator(new_properties.begin()),
    std::make_move_iterator(new_properties.end()));
  return make_description(desc.kind(), desc.quantifier(), std::move(merged));
}

const Value * get_property(const Description & desc, std::string_view key)
{
  return desc.get(key);
}

bool is_prefix_of(const Description & base, const Description & grounded)
{
  if (base.kind() != grounded.kind() || base.quantifier() != grounded.quantifier()) {
    return false;
  }
  const auto & a = base.properties();
  const auto & b = grounded.properties();
  if (a.size() > b.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].key != b[i].key || !value_equal(a[i].value, b[i].value)) {
      return false;
    }
  }
  return true;
}

Value sym(std::string name)
{
  return Symbol{std::move(name)};
}

Value nest(Description desc)
{
  return std::make_shared<const Description>(std::move(desc));
}

Property prop(std::string key, Value value)
{
  return Property{std::move(key), std::move(value)};
}

namespace
{

void render_pose(std::ostream & os, const Pose3D & p)
{
  os << "(pose-3d " << p.x << ' ' << p.y << ' ' << p.z << ' ' << p.yaw << ')';
}

void render(std::ostream & os, const Value & value);

void render(std::ostream & os, const Description & d)
{
  os << '(' << to_string(d.quantifier()) << ' ' << to_string(d.kind());
  for (const auto & p : d.properties()) {
    os << " (" << p.key << ' ';
    render(os, p.value);
    os << ')';
  }
  os << ')';
}

void render(std::ostream & os, const Value & value)
{
  std::visit(
    [&os](const auto & v) {
      using T = std::decay_t<decltype(v)>;
      if constexpr (std::is_same_v<T, Symbol>) {
        os << v.name;
      } else if constexpr (std::is_same_v<T, double>) {
        os << v;
      } else if constexpr (std::is_same_v<T, Pose2D>) {
        os << "(pose-2d " << v.x << ' ' << v.y << ' ' << v.theta << ')';
      } else if constexpr (std::is_same_v<T, Pose3D>) {
        render_pose(os, v);
      } else if constexpr (std::is_same_v<T, KeyPoseTrajectory>) {
        os << "(trajectory";
        for (const auto & kp : v.poses()) {
          os << " (" << to_string(kp.label) << ' ';
          render_pose(os, kp.pose);
          os << ')';
        }
        os << ')';
      } else {
        render(os, *v);
      }
    },
    value);
}

}  // namespace

std::string to_string(const Description & desc)
{
  std::ostringstream os;
  os.precision(4);
  render(os, desc);
  return os.str();
}

std::string to_string(const Value & value)
{
  std::ostringstream os;
  os.precision(4);
  render(os, value);
  return os.str();
}

std::string_view to_string(ConstraintKind kind)
{
  switch (kind) {
    case ConstraintKind::reachable_for: return "reachable-for";
    case ConstraintKind::visible_from: return "visible-from";
    case ConstraintKind::on_surface: return "on-surface";
    case ConstraintKind::near: return "near";
  }
  return "unknown";
}

LocationConstraint make_constraint(
  ConstraintKind kind, std::variant<Pose3D, std::string> reference,
  double radius_min, double radius_max)
{
  if (!(radius_min >= 0.0) || !(radius_max >= radius_min)) {
    throw InvalidArgument("constraint radius bounds must satisfy 0 <= min <= max");
  }
  const bool wants_surface = kind == ConstraintKind::on_surface;
  if (wants_surface != std::holds_alternative<std::string>(reference)) {
    throw InvalidArgument(
            std::string(to_string(kind)) +
            (wants_surface ? " needs a surface name" : " needs a reference pose"));
  }
  return LocationConstraint{kind, std::move(reference), radius_min, radius_max};
}

const ParameterTable & default_parameter_table()
{
  static const ParameterTable table = {
    {"milk", {{GraspType::front, GraspType::back}, 0.09, 20.0, 0.02}},
    {"cup", {{GraspType::front, GraspType::back}, 0.09, 15.0, 0.02}},
    {"cereal", {{GraspType::front, GraspType::back}, 0.10, 20.0, 0.03}},
    {"bowl", {{GraspType::top}, 0.11, 15.0, 0.0}},
    {"spoon", {{GraspType::top}, 0.05, 10.0, 0.0}},
  };
  return table;
}

namespace
{

const ObjectParams & lookup(const ParameterTable & table, std::string_view object_type)
{
  const auto it = table.find(object_type);
  if (it == table.end()) {
    throw UnknownObjectType("unknown object type '" + std::string(object_type) + "'");
  }
  return it->second;
}

// Name of an object whose box contains the point, so that the object does not
// occlude its own pose.
std::string object_at(const geom::WorldState & world, const Pose3D & p)
{
  for (const auto & o : world.objects()) {
    if (geom::distance_to_object(o, p) == 0.0) {
      return o.name;
    }
  }
  return {};
}

}  // namespace

bool satisfies(const Pose2D & base, const LocationConstraint & c, const geom::WorldState & world)
{
  if (c.kind == ConstraintKind::on_surface) {
    const auto & name = std::get<std::string>(c.reference);
    const geom::Body * body = world.find_body(name);
    if (!body) {
      throw InvalidArgument("unknown surface '" + name + "'");
    }
    const double d = geom::distance_to_rect(base.x, base.y, body->footprint);
    return d >= c.radius_min && d <= c.radius_max;
  }
  const Pose3D & ref = std::get<Pose3D>(c.reference);
  const double d = std::hypot(ref.x - base.x, ref.y - base.y);
  if (d < c.radius_min || d > c.radius_max) {
    return false;
  }
  if (c.kind == ConstraintKind::visible_from) {
    const Pose3D eye{base.x, base.y, world.robot().geometry.eye_height,
      std::atan2(ref.y - base.y, ref.x - base.x)};
    return geom::visible(world, eye, ref, object_at(world, ref));
  }
  return true;
}

Pose2D sample_base_location(
  const std::vector<Pose3D> & reference_poses,
  const std::vector<LocationConstraint> & constraints,
  const geom::WorldState & world, Rng & rng, int max_attempts)
{
  if (reference_poses.empty()) {
    throw InvalidArgument("sample_base_location needs at least one reference pose");
  }
  double r_lo = 0.4;
  double r_hi = 1.2;
  for (const auto & c : constraints) {
    if (c.kind != ConstraintKind::on_surface) {
      r_lo = c.radius_min;
      r_hi = c.radius_max;
      break;
    }
  }
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    const Pose3D & ref = reference_poses[static_cast<std::size_t>(attempt) % reference_poses.size()];
    const double r = rng.uniform(r_lo, r_hi);
    const double a = rng.uniform(-kPi, kPi);
    const double x = ref.x + r * std::cos(a);
    const double y = ref.y + r * std::sin(a);
    const Pose2D candidate = make_pose2d(x, y, std::atan2(ref.y - y, ref.x - x));
    if (!geom::within_bounds(world, candidate) || !geom::base_collision_free(world, candidate)) {
      continue;
    }
    const bool ok = std::all_of(
      constraints.begin(), constraints.end(),
      [&](const LocationConstraint & c) {return satisfies(candidate, c, world);});
    if (ok) {
      return candidate;
    }
  }
  throw NoValidSample(
          "no collision-free base pose after " + std::to_string(max_attempts) + " samples");
}

Arm choose_arm(const Description &, const geom::RobotState & robot, Rng & rng)
{
  const bool left_free = !robot.arm(Arm::left).attachment;
  const bool right_free = !robot.arm(Arm::right).attachment;
  if (left_free && right_free) {
    return rng.index(2) == 0 ? Arm::left : Arm::right;
  }
  if (left_free) {
    return Arm::left;
  }
  if (right_free) {
    return Arm::right;
  }
  throw BothArmsOccupied("both grippers hold objects");
}

const std::vector<GraspType> & allowed_grasps(const ParameterTable & table, std::string_view object_type)
{
  return lookup(table, object_type).grasps;
}

GraspType choose_grasp(const ParameterTable & table, std::string_view object_type, Rng & rng)
{
  const auto & grasps = lookup(table, object_type).grasps;
  if (grasps.empty()) {
    throw InvalidArgument("no grasps allowed for '" + std::string(object_type) + "'");
  }
  return grasps[rng.index(grasps.size())];
}

GraspType choose_grasp(std::string_view object_type, Rng & rng)
{
  return choose_grasp(default_parameter_table(), object_type, rng);
}

GraspParams grasp_params(const ParameterTable & table, std::string_view object_type)
{
  const auto & p = lookup(table, object_type);
  return GraspParams{p.gripper_opening, p.grasping_force};
}

GraspParams grasp_params(std::string_view object_type)
{
  return grasp_params(default_parameter_table(), object_type);
}

Direction approach_direction(GraspType grasp, double tool_yaw)
{
  if (grasp == GraspType::top) {
    return Direction{0.0, 0.0, -1.0};
  }
  return Direction{std::cos(tool_yaw), std::sin(tool_yaw), 0.0};
}

double tool_yaw_for(GraspType grasp, double object_yaw)
{
  return grasp == GraspType::back ? normalize_angle(object_yaw + kPi) : normalize_angle(object_yaw);
}

KeyPoseTrajectory reaching_trajectory(
  const ParameterTable & table, std::string_view object_type, Arm, GraspType grasp,
  const Pose3D & object_pose)
{
  const double standoff = lookup(table, object_type).standoff;
  const double yaw = tool_yaw_for(grasp, object_pose.yaw);
  const Direction u = approach_direction(grasp, yaw);
  const Pose3D grasp_pose{
    object_pose.x - standoff * u.x, object_pose.y - standoff * u.y,
    object_pose.z - standoff * u.z, yaw};
  const Pose3D pre_grasp{
    grasp_pose.x - kPreGraspRetreat * u.x, grasp_pose.y - kPreGraspRetreat * u.y,
    grasp_pose.z - kPreGraspRetreat * u.z, yaw};
  return KeyPoseTrajectory({{KeyPoseLabel::pre_grasp, pre_grasp}, {KeyPoseLabel::grasp, grasp_pose}});
}

KeyPoseTrajectory reaching_trajectory(
  std::string_view object_type, Arm arm, GraspType grasp, const Pose3D & object_pose)
{
  return reaching_trajectory(default_parameter_table(), object_type, arm, grasp, object_pose);
}

KeyPoseTrajectory lifting_trajectory(
  std::string_view, Arm, GraspType, const KeyPoseTrajectory & reach)
{
  const KeyPose * g = reach.find(KeyPoseLabel::grasp);
  if (!g) {
    throw MissingGraspPose("reaching trajectory has no grasp pose");
  }
  Pose3D lift = g->pose;
  lift.z += kLiftHeight;
  return KeyPoseTrajectory({{KeyPoseLabel::lift, lift}});
}

Pose3D tool_pose_for_placement(const Pose3D & grip_offset, const Pose3D & placement)
{
  const double yaw = normalize_angle(placement.yaw - grip_offset.yaw);
  const double c = std::cos(yaw);
  const double s = std::sin(yaw);
  return Pose3D{
    placement.x - (c * grip_offset.x - s * grip_offset.y),
    placement.y - (s * grip_offset.x + c * grip_offset.y),
    placement.z - grip_offset.z, yaw};
}

KeyPoseTrajectory placing_trajectory(GraspType grasp, const Pose3D & place_tool_pose)
{
  Pose3D pre = place_tool_pose;
  pre.z += kPrePlaceHeight;
  const Direction u = approach_direction(grasp, place_tool_pose.yaw);
  const Pose3D retract{
    place_tool_pose.x - kRetractDistance * u.x, place_tool_pose.y - kRetractDistance * u.y,
    place_tool_pose.z - kRetractDistance * u.z, place_tool_pose.yaw};
  return KeyPoseTrajectory({
      {KeyPoseLabel::pre_place, pre}, {KeyPoseLabel::place, place_tool_pose},
      {KeyPoseLabel::retract, retract}});
}

}  // namespace fetchproj::designator
