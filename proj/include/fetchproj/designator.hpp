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

#ifndef FETCHPROJ__DESIGNATOR_HPP_
#define FETCHPROJ__DESIGNATOR_HPP_

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fetchproj/core.hpp"
#include "fetchproj/world.hpp"

/// Entity descriptions and the knowledge rules that ground them.
///
/// A Description is an underspecified, symbolic key-value record of an
/// action, object or location. Plans pass descriptions around and ground
/// them by appending properties (arm, grasp, trajectories, poses); a grounded
/// description always has its input as a prefix.
namespace fetchproj::designator
{

class DesignatorError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class DuplicateKey : public DesignatorError
{
public:
  using DesignatorError::DesignatorError;
};

class MissingType : public DesignatorError
{
public:
  using DesignatorError::DesignatorError;
};

class OverrideAttempt : public DesignatorError
{
public:
  using DesignatorError::DesignatorError;
};

class UnknownObjectType : public DesignatorError
{
public:
  using DesignatorError::DesignatorError;
};

class BothArmsOccupied : public DesignatorError
{
public:
  using DesignatorError::DesignatorError;
};

class MissingGraspPose : public DesignatorError
{
public:
  using DesignatorError::DesignatorError;
};

/// No base pose satisfied the constraints within the attempt budget.
class NoValidSample : public DesignatorError
{
public:
  using DesignatorError::DesignatorError;
};

struct Symbol
{
  std::string name;

  bool operator==(const Symbol &) const = default;
};

enum class KeyPoseLabel { pre_grasp, grasp, lift, pre_place, place, retract };

std::string_view to_string(KeyPoseLabel label);
std::optional<KeyPoseLabel> parse_key_pose_label(std::string_view text);

struct KeyPose
{
  KeyPoseLabel label;
  Pose3D pose;

  bool operator==(const KeyPose &) const = default;
};

/// Non-empty sequence of labelled key poses in strictly increasing label order.
class KeyPoseTrajectory
{
public:
  explicit KeyPoseTrajectory(std::vector<KeyPose> poses);

  const std::vector<KeyPose> & poses() const {return poses_;}
  const KeyPose * find(KeyPoseLabel label) const;

  bool operator==(const KeyPoseTrajectory &) const = default;

private:
  std::vector<KeyPose> poses_;
};

enum class Kind { action, object, location };
enum class Quantifier { an, a, the };

std::string_view to_string(Kind kind);
std::string_view to_string(Quantifier q);
std::optional<Kind> parse_kind(std::string_view text);
std::optional<Quantifier> parse_quantifier(std::string_view text);

class Description;
using DescriptionPtr = std::shared_ptr<const Description>;

using Value = std::variant<Symbol, double, Pose2D, Pose3D, KeyPoseTrajectory, DescriptionPtr>;

bool value_equal(const Value & a, const Value & b);

struct Property
{
  std::string key;
  Value value;
};

class Description
{
public:
  Kind kind() const {return kind_;}
  Quantifier quantifier() const {return quantifier_;}
  const std::vector<Property> & properties() const {return properties_;}
  /// Value of the mandatory `type` property.
  const std::string & type() const;

  const Value * get(std::string_view key) const;
  bool has(std::string_view key) const {return get(key) != nullptr;}

  template<typename T>
  const T * get_as(std::string_view key) const
  {
    const Value * v = get(key);
    return v ? std::get_if<T>(v) : nullptr;
  }

  std::optional<std::string> symbol(std::string_view key) const;
  const Description * nested(std::string_view key) const;

  bool operator==(const Description & other) const;

private:
  friend Description make_description(Kind, Quantifier, std::vector<Property>);
  Description(Kind kind, Quantifier quantifier, std::vector<Property> properties);

  Kind kind_;
  Quantifier quantifier_;
  std::vector<Property> properties_;
};

/// Builds a description. Throws MissingType when there is no symbolic
/// `type` property and DuplicateKey when a key repeats.
Description make_description(Kind kind, Quantifier quantifier, std::vector<Property> properties);

/// Appends properties; existing keys can never be rewritten (OverrideAttempt).
Description extend(const Description & desc, std::vector<Property> new_properties);

const Value * get_property(const Description & desc, std::string_view key);

/// True when `base`'s property list is a prefix of `grounded`'s.
bool is_prefix_of(const Description & base, const Description & grounded);

// Construction shorthands.
Value sym(std::string name);
Value nest(Description desc);
Property prop(std::string key, Value value);

/// Lisp-style rendering, e.g. `(an action (type picking-up) (arm left))`.
std::string to_string(const Description & desc);
std::string to_string(const Value & value);

enum class ConstraintKind { reachable_for, visible_from, on_surface, near };

std::string_view to_string(ConstraintKind kind);

struct LocationConstraint
{
  ConstraintKind kind;
  // Pose3D for reachable-for / visible-from / near; surface name for on-surface.
  std::variant<Pose3D, std::string> reference;
  double radius_min{0.0};
  double radius_max{0.0};
};

LocationConstraint make_constraint(
  ConstraintKind kind, std::variant<Pose3D, std::string> reference,
  double radius_min, double radius_max);

struct ObjectParams
{
  std::vector<GraspType> grasps;
  double gripper_opening{0.0};
  double grasping_force{0.0};
  double standoff{0.0};
};

using ParameterTable = std::map<std::string, ObjectParams, std::less<>>;

/// Built-in table for the breakfast objects.
const ParameterTable & default_parameter_table();

inline constexpr double kPreGraspRetreat = 0.10;
inline constexpr double kLiftHeight = 0.08;
inline constexpr double kPrePlaceHeight = 0.10;
inline constexpr double kRetractDistance = 0.10;
inline constexpr int kDefaultSampleAttempts = 50;

Pose2D sample_base_location(
  const std::vector<Pose3D> & reference_poses,
  const std::vector<LocationConstraint> & constraints,
  const geom::WorldState & world, Rng & rng, int max_attempts = kDefaultSampleAttempts);

/// True when the base pose meets every constraint (collision is checked separately).
bool satisfies(
  const Pose2D & base, const LocationConstraint & constraint, const geom::WorldState & world);

Arm choose_arm(const Description & object_desc, const geom::RobotState & robot, Rng & rng);

GraspType choose_grasp(const ParameterTable & table, std::string_view object_type, Rng & rng);
GraspType choose_grasp(std::string_view object_type, Rng & rng);

const std::vector<GraspType> & allowed_grasps(const ParameterTable & table, std::string_view object_type);

struct GraspParams
{
  double gripper_opening;
  double grasping_force;
};

GraspParams grasp_params(const ParameterTable & table, std::string_view object_type);
GraspParams grasp_params(std::string_view object_type);

/// Unit direction the tool travels while approaching (map frame).
struct Direction
{
  double x;
  double y;
  double z;
};

Direction approach_direction(GraspType grasp, double tool_yaw);
/// Tool heading for a grasp on an object with the given heading.
double tool_yaw_for(GraspType grasp, double object_yaw);

KeyPoseTrajectory reaching_trajectory(
  const ParameterTable & table, std::string_view object_type, Arm arm, GraspType grasp,
  const Pose3D & object_pose);
KeyPoseTrajectory reaching_trajectory(
  std::string_view object_type, Arm arm, GraspType grasp, const Pose3D & object_pose);

KeyPoseTrajectory lifting_trajectory(
  std::string_view object_type, Arm arm, GraspType grasp, const KeyPoseTrajectory & reach);

/// Tool pose that puts an object held with `grip_offset` at `placement`.
Pose3D tool_pose_for_placement(const Pose3D & grip_offset, const Pose3D & placement);

/// [pre-place, place, retract] around the tool's placing pose.
KeyPoseTrajectory placing_trajectory(GraspType grasp, const Pose3D & place_tool_pose);

}  // namespace fetchproj::designator

#endif  // FETCHPROJ__DESIGNATOR_HPP_
