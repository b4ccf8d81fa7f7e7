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

#ifndef FETCHPROJ__WORLD_HPP_
#define FETCHPROJ__WORLD_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fetchproj/core.hpp"

namespace fetchproj::geom
{

/// Axis-aligned rectangle in the map frame.
struct Rect
{
  double x_min{0.0};
  double y_min{0.0};
  double x_max{0.0};
  double y_max{0.0};

  bool contains(double x, double y) const;
  bool contains(const Rect & other) const;
  bool overlaps(const Rect & other) const;
  double width() const {return x_max - x_min;}
  double depth() const {return y_max - y_min;}

  bool operator==(const Rect &) const = default;
};

/// Euclidean distance from a point to a rectangle (0 inside).
double distance_to_rect(double x, double y, const Rect & rect);
/// Minimum distance between a segment and a rectangle (0 when they touch).
double segment_rect_distance(double ax, double ay, double bx, double by, const Rect & rect);
/// Parameter interval [t0, t1] of the segment a->b inside the rectangle, if any.
std::optional<std::pair<double, double>> clip_segment(
  double ax, double ay, double bx, double by, const Rect & rect);

enum class BodyKind { furniture, surface, object };

std::string_view to_string(BodyKind kind);
std::optional<BodyKind> parse_body_kind(std::string_view text);

struct Body
{
  std::string name;
  Rect footprint;
  double z_lo{0.0};
  double z_hi{0.0};
  BodyKind kind{BodyKind::furniture};

  bool operator==(const Body &) const = default;
};

/// Validates z_lo < z_hi and a non-degenerate footprint.
Body make_body(std::string name, const Rect & footprint, double z_lo, double z_hi, BodyKind kind);

struct Dimensions
{
  double dx{0.0};
  double dy{0.0};
  double dz{0.0};

  bool operator==(const Dimensions &) const = default;
};

inline constexpr std::string_view kFloor = "floor";

struct ObjectInstance
{
  std::string name;
  std::string type;
  Pose3D pose;
  Dimensions dims;
  // Supporting surface name (or kFloor); empty while attached.
  std::string support;
  std::optional<Arm> attached_to;

  bool operator==(const ObjectInstance &) const = default;
};

/// Map-frame footprint of a box with the given heading (bounding rectangle of
/// the rotated base).
Rect footprint_of(const Pose3D & pose, const Dimensions & dims);

/// Fixed robot geometry. Defaults follow a PR2-sized mobile manipulator.
struct RobotGeometry
{
  double base_radius{0.33};
  double shoulder_lateral{0.22};
  double shoulder_height{1.0};
  double eye_height{1.4};
  double reach_min{0.35};
  double reach_max{0.85};
  double band_lo{0.3};
  double band_hi{1.3};
  // Side grasps must approach within this angle of the shoulder->tool bearing.
  double max_approach_angle{1.75};
  double max_head_yaw{2.8};
  double max_gripper_opening{0.12};

  bool operator==(const RobotGeometry &) const = default;
};

struct ArmState
{
  std::optional<Pose3D> tool;
  double gripper_opening{0.0};
  std::optional<std::string> attachment;
  // Pose of the attached object expressed in the tool frame.
  std::optional<Pose3D> grip_offset;

  bool operator==(const ArmState &) const = default;
};

struct RobotState
{
  Pose2D base;
  double head_yaw{0.0};
  double head_pitch{0.0};
  std::array<ArmState, 2> arms{};
  RobotGeometry geometry;

  ArmState & arm(Arm which) {return arms[which == Arm::left ? 0 : 1];}
  const ArmState & arm(Arm which) const {return arms[which == Arm::left ? 0 : 1];}
  /// Shoulder position in the map frame (yaw = base heading).
  Pose3D shoulder(Arm which) const;
  /// Camera pose: above the base center, looking along base heading + head yaw.
  Pose3D eye() const;
  /// Tool pose used when an arm is parked (tool unset).
  Pose3D park_pose(Arm which) const;

  bool operator==(const RobotState &) const = default;
};

namespace motion
{
struct SetBase {Pose2D pose;};
struct SetHead {double yaw; double pitch;};
struct SetTool {Arm arm; std::optional<Pose3D> pose;};
struct SetGripper {Arm arm; double opening;};
struct Attach {Arm arm; std::string object;};
struct Detach {Arm arm; Pose3D placement;};
}  // namespace motion

using Motion = std::variant<
  motion::SetBase, motion::SetHead, motion::SetTool,
  motion::SetGripper, motion::Attach, motion::Detach>;

class PreconditionViolation : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class ForeignSnapshot : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Everything that makes up a world's state; compared by value.
struct WorldContents
{
  Rect bounds;
  std::vector<Body> bodies;
  std::vector<ObjectInstance> objects;
  RobotState robot;

  bool operator==(const WorldContents &) const = default;
};

class WorldState;

/// Immutable copy of a world's contents, restorable only into its origin.
class SnapshotToken
{
public:
  std::uint64_t world_id() const {return world_id_;}
  const WorldContents & contents() const {return contents_;}

private:
  friend class WorldState;
  SnapshotToken(std::uint64_t id, WorldContents contents)
  : world_id_(id), contents_(std::move(contents)) {}

  std::uint64_t world_id_;
  WorldContents contents_;
};

/// 2.5D geometric world. Serves both as the robot's belief state and as the
/// substrate for projection.
class WorldState
{
public:
  WorldState(
    const Rect & bounds, std::vector<Body> bodies, std::vector<ObjectInstance> objects,
    const RobotState & robot);

  // Copies are independent worlds with their own identity.
  WorldState(const WorldState & other);
  WorldState & operator=(const WorldState & other);
  WorldState(WorldState &&) noexcept = default;
  WorldState & operator=(WorldState &&) noexcept = default;

  const Rect & bounds() const {return contents_.bounds;}
  const std::vector<Body> & bodies() const {return contents_.bodies;}
  const std::vector<ObjectInstance> & objects() const {return contents_.objects;}
  const RobotState & robot() const {return contents_.robot;}
  const WorldContents & contents() const {return contents_;}
  std::uint64_t id() const {return id_;}
  std::uint64_t generation() const {return generation_;}

  const ObjectInstance * find_object(std::string_view name) const;
  const Body * find_body(std::string_view name) const;

  void apply(const Motion & m);

  /// Overwrites an object's pose estimate (belief update from perception).
  /// Support is recomputed from the new pose.
  void update_object_pose(std::string_view name, const Pose3D & pose);

  SnapshotToken snapshot() const;
  void restore(const SnapshotToken & token);

  /// Deep equality of contents; identity and generation are ignored.
  bool same_state(const WorldState & other) const {return contents_ == other.contents_;}

private:
  ObjectInstance & object_ref(std::string_view name);
  void refresh_attached(Arm arm);
  std::string support_for(const Pose3D & pose, const Dimensions & dims) const;

  std::uint64_t id_;
  std::uint64_t generation_{0};
  WorldContents contents_;
};

/// Body kinds that block the robot base, the arm and the line of sight.
bool is_obstacle(const Body & body);

/// Robot disk at base_pose intersects no furniture or surface footprint.
bool base_collision_free(const WorldState & world, const Pose2D & base_pose);
/// Same test for an explicit radius.
bool base_collision_free(const WorldState & world, const Pose2D & base_pose, double radius);
/// The disk swept along the straight line from -> to stays clear.
bool base_path_clear(const WorldState & world, const Pose2D & from, const Pose2D & to);
bool within_bounds(const WorldState & world, const Pose2D & base_pose);

/// Straight 3D segment a->b crosses the box [footprint] x [z_lo, z_hi].
bool segment_hits_box(const Pose3D & a, const Pose3D & b, const Rect & footprint, double z_lo, double z_hi);

/// Line of sight eye->target is not blocked by any body or object.
/// Objects named in `ignore` are transparent; attached objects never occlude.
bool visible(
  const WorldState & world, const Pose3D & eye, const Pose3D & target,
  std::string_view ignore = {});

struct ArmConfig
{
  Arm arm;
  Pose3D shoulder;
  Pose3D tool;
  double reach{0.0};
};

/// Annulus, height band and approach-direction test (no collision checks).
bool in_workspace(const RobotState & robot, Arm arm, const Pose3D & tool_pose, GraspType grasp);

/// Arm segment shoulder->tool is clear of furniture and surfaces.
bool arm_clear_of_furniture(const WorldState & world, const RobotState & robot, Arm arm, const Pose3D & tool_pose);

/// Arm segment shoulder->tool is clear of objects other than the ignored ones.
/// Attached objects are always ignored.
bool arm_clear_of_objects(
  const WorldState & world, const RobotState & robot, Arm arm, const Pose3D & tool_pose,
  std::string_view ignore = {});

/// Analytic reachability: workspace membership plus a furniture-free arm segment.
std::optional<ArmConfig> reachable(
  const WorldState & world, const RobotState & robot, Arm arm,
  const Pose3D & grasp_pose, GraspType grasp);

/// Object footprint fully inside one surface, resting on it (1 mm), and free
/// of overlap with other objects.
bool stable_placement(
  const WorldState & world, const Dimensions & dims, const Pose3D & pose,
  std::string_view ignore = {});
bool stable_placement(const WorldState & world, const ObjectInstance & object, const Pose3D & pose);

/// Attach requires the tool within this distance of the object's box.
inline constexpr double kGraspContactTolerance = 0.02;

/// Distance from a point to an object's box (0 inside).
double distance_to_object(const ObjectInstance & object, const Pose3D & point);

struct NoiseModel
{
  double sigma{0.015};
  double clip{0.05};
  double p_flip{0.1};

  static NoiseModel none() {return NoiseModel{0.0, 0.0, 0.0};}
  bool operator==(const NoiseModel &) const = default;
};

inline constexpr double kDetectionRange = 2.5;

struct Detection
{
  std::string object;
  Pose3D pose;
};

/// Nearest visible unattached object of the type within range, with its pose
/// perturbed by the noise model. nullopt means no matching object was seen.
std::optional<Detection> detect(
  const WorldState & world, const Pose3D & eye, std::string_view object_type,
  const NoiseModel & noise, Rng & rng);

}  // namespace fetchproj::geom

#endif  // FETCHPROJ__WORLD_HPP_
