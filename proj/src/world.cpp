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

#include "fetchproj/world.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

namespace fetchproj::geom
{

namespace
{

std::atomic<std::uint64_t> g_next_world_id{1};

std::uint64_t next_world_id()
{
  return g_next_world_id.fetch_add(1, std::memory_order_relaxed);
}

constexpr double kSupportTolerance = 1e-3;

double point_segment_distance(double px, double py, double ax, double ay, double bx, double by)
{
  const double vx = bx - ax;
  const double vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = std::clamp(((px - ax) * vx + (py - ay) * vy) / len2, 0.0, 1.0);
  }
  return std::hypot(px - (ax + t * vx), py - (ay + t * vy));
}

// Tool-frame helpers: rigid 2.5D transforms (translation + yaw).
Pose3D relative_to(const Pose3D & frame, const Pose3D & p)
{
  const double c = std::cos(frame.yaw);
  const double s = std::sin(frame.yaw);
  const double dx = p.x - frame.x;
  const double dy = p.y - frame.y;
  return Pose3D{c * dx + s * dy, -s * dx + c * dy, p.z - frame.z, normalize_angle(p.yaw - frame.yaw)};
}

Pose3D compose(const Pose3D & frame, const Pose3D & rel)
{
  const double c = std::cos(frame.yaw);
  const double s = std::sin(frame.yaw);
  return Pose3D{
    frame.x + c * rel.x - s * rel.y,
    frame.y + s * rel.x + c * rel.y,
    frame.z + rel.z,
    normalize_angle(frame.yaw + rel.yaw)};
}

Pose3D as_frame(const Pose2D & base)
{
  return Pose3D{base.x, base.y, 0.0, base.theta};
}

}  // namespace

bool Rect::contains(double x, double y) const
{
  return x >= x_min && x <= x_max && y >= y_min && y <= y_max;
}

bool Rect::contains(const Rect & other) const
{
  return other.x_min >= x_min && other.x_max <= x_max &&
         other.y_min >= y_min && other.y_max <= y_max;
}

bool Rect::overlaps(const Rect & other) const
{
  return x_min < other.x_max && other.x_min < x_max &&
         y_min < other.y_max && other.y_min < y_max;
}

double distance_to_rect(double x, double y, const Rect & rect)
{
  const double cx = std::clamp(x, rect.x_min, rect.x_max);
  const double cy = std::clamp(y, rect.y_min, rect.y_max);
  return std::hypot(x - cx, y - cy);
}

std::optional<std::pair<double, double>> clip_segment(
  double ax, double ay, double bx, double by, const Rect & rect)
{
  // Liang-Barsky
  const double dx = bx - ax;
  const double dy = by - ay;
  double t0 = 0.0;
  double t1 = 1.0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {ax - rect.x_min, rect.x_max - ax, ay - rect.y_min, rect.y_max - ay};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) {
        return std::nullopt;
      }
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
    if (t0 > t1) {
      return std::nullopt;
    }
  }
  return std::make_pair(t0, t1);
}

double segment_rect_distance(double ax, double ay, double bx, double by, const Rect & rect)
{
  if (clip_segment(ax, ay, bx, by, rect)) {
    return 0.0;
  }
  double best = std::min(distance_to_rect(ax, ay, rect), distance_to_rect(bx, by, rect));
  const double corners[4][2] = {
    {rect.x_min, rect.y_min}, {rect.x_max, rect.y_min},
    {rect.x_min, rect.y_max}, {rect.x_max, rect.y_max}};
  for (const auto & c : corners) {
    best = std::min(best, point_segment_distance(c[0], c[1], ax, ay, bx, by));
  }
  return best;
}

std::string_view to_string(BodyKind kind)
{
  switch (kind) {
    case BodyKind::furniture: return "furniture";
    case BodyKind::surface: return "surface";
    case BodyKind::object: return "object";
  }
  return "unknown";
}

std::optional<BodyKind> parse_body_kind(std::string_view text)
{
  if (text == "furniture") {return BodyKind::furniture;}
  if (text == "surface") {return BodyKind::surface;}
  if (text == "object") {return BodyKind::object;}
  return std::nullopt;
}

Body make_body(std::string name, const Rect & footprint, double z_lo, double z_hi, BodyKind kind)
{
  if (!(z_lo < z_hi)) {
    throw InvalidArgument("body '" + name + "': z_lo must be below z_hi");
  }
  if (!(footprint.x_min < footprint.x_max) || !(footprint.y_min < footprint.y_max)) {
    throw InvalidArgument("body '" + name + "': degenerate footprint");
  }
  return Body{std::move(name), footprint, z_lo, z_hi, kind};
}

Rect footprint_of(const Pose3D & pose, const Dimensions & dims)
{
  const double c = std::abs(std::cos(pose.yaw));
  const double s = std::abs(std::sin(pose.yaw));
  const double hx = 0.5 * (c * dims.dx + s * dims.dy);
  const double hy = 0.5 * (s * dims.dx + c * dims.dy);
  return Rect{pose.x - hx, pose.y - hy, pose.x + hx, pose.y + hy};
}

Pose3D RobotState::shoulder(Arm which) const
{
  const double lateral = which == Arm::left ? geometry.shoulder_lateral : -geometry.shoulder_lateral;
  const double c = std::cos(base.theta);
  const double s = std::sin(base.theta);
  return Pose3D{base.x - s * lateral, base.y + c * lateral, geometry.shoulder_height, base.theta};
}

Pose3D RobotState::eye() const
{
  return Pose3D{base.x, base.y, geometry.eye_height, normalize_angle(base.theta + head_yaw)};
}

Pose3D RobotState::park_pose(Arm which) const
{
  const Pose3D sh = shoulder(which);
  const double c = std::cos(base.theta);
  const double s = std::sin(base.theta);
  const double forward = geometry.reach_min + 0.05;
  return Pose3D{sh.x + c * forward, sh.y + s * forward, geometry.shoulder_height, base.theta};
}

WorldState::WorldState(
  const Rect & bounds, std::vector<Body> bodies, std::vector<ObjectInstance> objects,
  const RobotState & robot)
: id_(next_world_id()),
  contents_{bounds, std::move(bodies), std::move(objects), robot}
{
  for (std::size_t i = 0; i < contents_.bodies.size(); ++i) {
    const Body & b = contents_.bodies[i];
    make_body(b.name, b.footprint, b.z_lo, b.z_hi, b.kind);
    for (std::size_t j = 0; j < i; ++j) {
      if (contents_.bodies[j].name == b.name) {
        throw InvalidArgument("duplicate body name '" + b.name + "'");
      }
    }
  }
  for (std::size_t i = 0; i < contents_.objects.size(); ++i) {
    ObjectInstance & o = contents_.objects[i];
    if (o.dims.dx <= 0.0 || o.dims.dy <= 0.0 || o.dims.dz <= 0.0) {
      throw InvalidArgument("object '" + o.name + "': dimensions must be positive");
    }
    if (o.attached_to) {
      throw InvalidArgument("object '" + o.name + "': objects cannot start attached");
    }
    o.pose.yaw = normalize_angle(o.pose.yaw);
    o.support = support_for(o.pose, o.dims);
    if (o.support.empty()) {
      throw InvalidArgument("object '" + o.name + "' is not resting on a surface");
    }
    const Rect fp = footprint_of(o.pose, o.dims);
    for (std::size_t j = 0; j < i; ++j) {
      const ObjectInstance & other = contents_.objects[j];
      if (other.name == o.name) {
        throw InvalidArgument("duplicate object name '" + o.name + "'");
      }
      const bool z_overlap =
        std::abs(o.pose.z - other.pose.z) < 0.5 * (o.dims.dz + other.dims.dz);
      if (z_overlap && fp.overlaps(footprint_of(other.pose, other.dims))) {
        throw InvalidArgument("objects '" + o.name + "' and '" + other.name + "' overlap");
      }
    }
  }
  contents_.robot.base.theta = normalize_angle(contents_.robot.base.theta);
  if (!base_collision_free(*this, contents_.robot.base)) {
    throw InvalidArgument("robot base starts in collision");
  }
}

WorldState::WorldState(const WorldState & other)
: id_(next_world_id()), generation_(0), contents_(other.contents_)
{
}

WorldState & WorldState::operator=(const WorldState & other)
{
  if (this != &other) {
    contents_ = other.contents_;
    ++generation_;
  }
  return *this;
}

const ObjectInstance * WorldState::find_object(std::string_view name) const
{
  for (const auto & o : contents_.objects) {
    if (o.name == name) {
      return &o;
    }
  }
  return nullptr;
}

const Body * WorldState::find_body(std::string_view name) const
{
  for (const auto & b : contents_.bodies) {
    if (b.name == name) {
      return &b;
    }
  }
  return nullptr;
}

ObjectInstance & WorldState::object_ref(std::string_view name)
{
  for (auto & o : contents_.objects) {
    if (o.name == name) {
      return o;
    }
  }
  throw PreconditionViolation("unknown object '" + std::string(name) + "'");
}

std::string WorldState::support_for(const Pose3D & pose, const Dimensions & dims) const
{
  for (const auto & b : contents_.bodies) {
    if (b.kind != BodyKind::surface) {
      continue;
    }
    if (b.footprint.contains(pose.x, pose.y) &&
      std::abs(pose.z - (b.z_hi + 0.5 * dims.dz)) <= kSupportTolerance)
    {
      return b.name;
    }
  }
  if (std::abs(pose.z - 0.5 * dims.dz) <= kSupportTolerance) {
    return std::string(kFloor);
  }
  return {};
}

void WorldState::refresh_attached(Arm arm)
{
  const ArmState & a = contents_.robot.arm(arm);
  if (!a.attachment) {
    return;
  }
  ObjectInstance & o = object_ref(*a.attachment);
  o.pose = compose(*a.tool, *a.grip_offset);
}

void WorldState::apply(const Motion & m)
{
  RobotState & robot = contents_.robot;
  std::visit(
    [&](const auto & mo) {
      using T = std::decay_t<decltype(mo)>;
      if constexpr (std::is_same_v<T, motion::SetBase>) {
        const Pose3D old_frame = as_frame(robot.base);
        const Pose2D target{mo.pose.x, mo.pose.y, normalize_angle(mo.pose.theta)};
        const Pose3D new_frame = as_frame(target);
        for (auto & a : robot.arms) {
          if (a.tool) {
            a.tool = compose(new_frame, relative_to(old_frame, *a.tool));
          }
        }
        robot.base = target;
        refresh_attached(Arm::left);
        refresh_attached(Arm::right);
      } else if constexpr (std::is_same_v<T, motion::SetHead>) {
        if (std::abs(mo.yaw) > robot.geometry.max_head_yaw) {
          throw PreconditionViolation("head yaw beyond pan limit");
        }
        robot.head_yaw = mo.yaw;
        robot.head_pitch = mo.pitch;
      } else if constexpr (std::is_same_v<T, motion::SetTool>) {
        ArmState & a = robot.arm(mo.arm);
        if (!mo.pose && a.attachment) {
          throw PreconditionViolation("cannot park an arm that holds an object");
        }
        if (mo.pose) {
          Pose3D p = *mo.pose;
          p.yaw = normalize_angle(p.yaw);
          a.tool = p;
        } else {
          a.tool.reset();
        }
        refresh_attached(mo.arm);
      } else if constexpr (std::is_same_v<T, motion::SetGripper>) {
        ArmState & a = robot.arm(mo.arm);
        if (mo.opening < 0.0 || mo.opening > robot.geometry.max_gripper_opening) {
          throw PreconditionViolation("gripper opening out of range");
        }
        if (a.attachment) {
          const ObjectInstance * o = find_object(*a.attachment);
          if (mo.opening >= std::min(o->dims.dx, o->dims.dy)) {
            throw PreconditionViolation("opening the gripper would drop the attached object");
          }
        }
        a.gripper_opening = mo.opening;
      } else if constexpr (std::is_same_v<T, motion::Attach>) {
        ArmState & a = robot.arm(mo.arm);
        if (!a.tool) {
          throw PreconditionViolation("attach: arm is parked");
        }
        if (a.attachment) {
          throw PreconditionViolation("attach: gripper already holds an object");
        }
        ObjectInstance & o = object_ref(mo.object);
        if (o.attached_to) {
          throw PreconditionViolation("attach: object is held by another gripper");
        }
        if (distance_to_object(o, *a.tool) > kGraspContactTolerance) {
          throw PreconditionViolation("attach: tool is not at the object's grasp point");
        }
        a.attachment = o.name;
        a.grip_offset = relative_to(*a.tool, o.pose);
        a.gripper_opening = std::min(a.gripper_opening, 0.9 * std::min(o.dims.dx, o.dims.dy));
        o.attached_to = mo.arm;
        o.support.clear();
      } else if constexpr (std::is_same_v<T, motion::Detach>) {
        ArmState & a = robot.arm(mo.arm);
        if (!a.attachment) {
          throw PreconditionViolation("detach: gripper holds nothing");
        }
        ObjectInstance & o = object_ref(*a.attachment);
        Pose3D placement = mo.placement;
        placement.yaw = normalize_angle(placement.yaw);
        const std::string support = support_for(placement, o.dims);
        if (support.empty()) {
          throw PreconditionViolation("detach: placement is not supported by a surface");
        }
        o.pose = placement;
        o.support = support;
        o.attached_to.reset();
        a.attachment.reset();
        a.grip_offset.reset();
      }
    },
    m);
  ++generation_;
}

void WorldState::update_object_pose(std::string_view name, const Pose3D & pose)
{
  ObjectInstance & o = object_ref(name);
  if (o.attached_to) {
    throw PreconditionViolation("cannot relocate an attached object");
  }
  o.pose = pose;
  o.pose.yaw = normalize_angle(pose.yaw);
  const std::string support = support_for(o.pose, o.dims);
  if (!support.empty()) {
    o.support = support;
  }
  ++generation_;
}

SnapshotToken WorldState::snapshot() const
{
  return SnapshotToken(id_, contents_);
}

void WorldState::restore(const SnapshotToken & token)
{
  if (token.world_id_ != id_) {
    throw ForeignSnapshot("snapshot belongs to a different world");
  }
  contents_ = token.contents_;
  ++generation_;
}

bool is_obstacle(const Body & body)
{
  return body.kind == BodyKind::furniture || body.kind == BodyKind::surface;
}

bool base_collision_free(const WorldState & world, const Pose2D & base_pose)
{
  return base_collision_free(world, base_pose, world.robot().geometry.base_radius);
}

bool base_collision_free(const WorldState & world, const Pose2D & base_pose, double radius)
{
  for (const auto & b : world.bodies()) {
    if (is_obstacle(b) && distance_to_rect(base_pose.x, base_pose.y, b.footprint) < radius) {
      return false;
    }
  }
  return true;
}

bool base_path_clear(const WorldState & world, const Pose2D & from, const Pose2D & to)
{
  const double radius = world.robot().geometry.base_radius;
  for (const auto & b : world.bodies()) {
    if (is_obstacle(b) && segment_rect_distance(from.x, from.y, to.x, to.y, b.footprint) < radius) {
      return false;
    }
  }
  return true;
}

bool within_bounds(const WorldState & world, const Pose2D & base_pose)
{
  return world.bounds().contains(base_pose.x, base_pose.y);
}

bool segment_hits_box(const Pose3D & a, const Pose3D & b, const Rect & footprint, double z_lo, double z_hi)
{
  const auto span = clip_segment(a.x, a.y, b.x, b.y, footprint);
  if (!span) {
    return false;
  }
  const double z0 = a.z + span->first * (b.z - a.z);
  const double z1 = a.z + span->second * (b.z - a.z);
  return std::max(z0, z1) >= z_lo && std::min(z0, z1) <= z_hi;
}

namespace
{

bool hits_object(const ObjectInstance & o, const Pose3D & a, const Pose3D & b)
{
  const double half = 0.5 * o.dims.dz;
  return segment_hits_box(a, b, footprint_of(o.pose, o.dims), o.pose.z - half, o.pose.z + half);
}

}  // namespace

bool visible(const WorldState & world, const Pose3D & eye, const Pose3D & target, std::string_view ignore)
{
  for (const auto & b : world.bodies()) {
    if (is_obstacle(b) && segment_hits_box(eye, target, b.footprint, b.z_lo, b.z_hi)) {
      return false;
    }
  }
  for (const auto & o : world.objects()) {
    if (o.attached_to || (!ignore.empty() && o.name == ignore)) {
      continue;
    }
    if (hits_object(o, eye, target)) {
      return false;
    }
  }
  return true;
}

bool in_workspace(const RobotState & robot, Arm arm, const Pose3D & tool_pose, GraspType grasp)
{
  const RobotGeometry & g = robot.geometry;
  const Pose3D sh = robot.shoulder(arm);
  const double dx = tool_pose.x - sh.x;
  const double dy = tool_pose.y - sh.y;
  const double r = std::hypot(dx, dy);
  if (r < g.reach_min || r > g.reach_max) {
    return false;
  }
  if (tool_pose.z < g.band_lo || tool_pose.z > g.band_hi) {
    return false;
  }
  if (grasp != GraspType::top) {
    const double bearing = std::atan2(dy, dx);
    if (std::abs(normalize_angle(tool_pose.yaw - bearing)) > g.max_approach_angle) {
      return false;
    }
  }
  return true;
}

bool arm_clear_of_furniture(const WorldState & world, const RobotState & robot, Arm arm, const Pose3D & tool_pose)
{
  const Pose3D sh = robot.shoulder(arm);
  for (const auto & b : world.bodies()) {
    if (is_obstacle(b) && segment_hits_box(sh, tool_pose, b.footprint, b.z_lo, b.z_hi)) {
      return false;
    }
  }
  return true;
}

bool arm_clear_of_objects(
  const WorldState & world, const RobotState & robot, Arm arm, const Pose3D & tool_pose,
  std::string_view ignore)
{
  const Pose3D sh = robot.shoulder(arm);
  for (const auto & o : world.objects()) {
    if (o.attached_to || (!ignore.empty() && o.name == ignore)) {
      continue;
    }
    if (hits_object(o, sh, tool_pose)) {
      return false;
    }
  }
  return true;
}

std::optional<ArmConfig> reachable(
  const WorldState & world, const RobotState & robot, Arm arm,
  const Pose3D & grasp_pose, GraspType grasp)
{
  if (!in_workspace(robot, arm, grasp_pose, grasp)) {
    return std::nullopt;
  }
  if (!arm_clear_of_furniture(world, robot, arm, grasp_pose)) {
    return std::nullopt;
  }
  const Pose3D sh = robot.shoulder(arm);
  return ArmConfig{arm, sh, grasp_pose, std::hypot(grasp_pose.x - sh.x, grasp_pose.y - sh.y)};
}

bool stable_placement(
  const WorldState & world, const Dimensions & dims, const Pose3D & pose, std::string_view ignore)
{
  const Rect fp = footprint_of(pose, dims);
  bool supported = false;
  for (const auto & b : world.bodies()) {
    if (b.kind == BodyKind::surface && b.footprint.contains(fp) &&
      std::abs(pose.z - (b.z_hi + 0.5 * dims.dz)) <= kSupportTolerance)
    {
      supported = true;
      break;
    }
  }
  if (!supported) {
    return false;
  }
  for (const auto & o : world.objects()) {
    if (o.attached_to || (!ignore.empty() && o.name == ignore)) {
      continue;
    }
    const bool z_overlap = std::abs(pose.z - o.pose.z) < 0.5 * (dims.dz + o.dims.dz);
    if (z_overlap && fp.overlaps(footprint_of(o.pose, o.dims))) {
      return false;
    }
  }
  return true;
}

bool stable_placement(const WorldState & world, const ObjectInstance & object, const Pose3D & pose)
{
  return stable_placement(world, object.dims, pose, object.name);
}

double distance_to_object(const ObjectInstance & object, const Pose3D & point)
{
  const Rect fp = footprint_of(object.pose, object.dims);
  const double planar = distance_to_rect(point.x, point.y, fp);
  const double half = 0.5 * object.dims.dz;
  const double z_lo = object.pose.z - half;
  const double z_hi = object.pose.z + half;
  const double dz = point.z < z_lo ? z_lo - point.z : (point.z > z_hi ? point.z - z_hi : 0.0);
  return std::hypot(planar, dz);
}

std::optional<Detection> detect(
  const WorldState & world, const Pose3D & eye, std::string_view object_type,
  const NoiseModel & noise, Rng & rng)
{
  const ObjectInstance * best = nullptr;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto & o : world.objects()) {
    if (o.type != object_type || o.attached_to) {
      continue;
    }
    const double d = distance3d(eye, o.pose);
    if (d > kDetectionRange || d >= best_dist) {
      continue;
    }
    if (!visible(world, eye, o.pose, o.name)) {
      continue;
    }
    best = &o;
    best_dist = d;
  }
  if (!best) {
    return std::nullopt;
  }
  Pose3D pose = best->pose;
  if (noise.sigma > 0.0) {
    // Planar noise only: estimates stay on their supporting surface.
    pose.x += std::clamp(rng.normal(0.0, noise.sigma), -noise.clip, noise.clip);
    pose.y += std::clamp(rng.normal(0.0, noise.sigma), -noise.clip, noise.clip);
  }
  if (rng.bernoulli(noise.p_flip)) {
    pose.yaw = normalize_angle(pose.yaw + kPi);
  }
  return Detection{best->name, pose};
}

}  // namespace fetchproj::geom
