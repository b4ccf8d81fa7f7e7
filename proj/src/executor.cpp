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

#include "fetchproj/executor.hpp"

#include <cmath>
#include <sstream>
#include <thread>

namespace fetchproj::plans
{

namespace
{

Failure failure(FailureKind kind, std::string context)
{
  return Failure{kind, std::move(context)};
}

std::string pose_text(const Pose2D & p)
{
  std::ostringstream os;
  os.precision(3);
  os << std::fixed << "(" << p.x << " " << p.y << " " << p.theta << ")";
  return os.str();
}

std::string pose_text(const Pose3D & p)
{
  std::ostringstream os;
  os.precision(3);
  os << std::fixed << "(" << p.x << " " << p.y << " " << p.z << " " << p.yaw << ")";
  return os.str();
}

Pose3D current_tool(const geom::RobotState & robot, Arm arm)
{
  const auto & tool = robot.arm(arm).tool;
  return tool ? *tool : robot.park_pose(arm);
}

Pose3D lerp(const Pose3D & a, const Pose3D & b, double t)
{
  return Pose3D{
    a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.z + t * (b.z - a.z),
    normalize_angle(a.yaw + t * normalize_angle(b.yaw - a.yaw))};
}

Pose2D lerp(const Pose2D & a, const Pose2D & b, double t)
{
  return Pose2D{
    a.x + t * (b.x - a.x), a.y + t * (b.y - a.y),
    normalize_angle(a.theta + t * normalize_angle(b.theta - a.theta))};
}

// Tool path a->b stays clear of obstacles and of objects other than the target.
bool tool_path_clear(
  const geom::WorldState & world, const Pose3D & a, const Pose3D & b, std::string_view target)
{
  for (const auto & body : world.bodies()) {
    if (geom::is_obstacle(body) && geom::segment_hits_box(a, b, body.footprint, body.z_lo, body.z_hi)) {
      return false;
    }
  }
  for (const auto & o : world.objects()) {
    if (o.attached_to || o.name == target) {
      continue;
    }
    const geom::Rect fp = geom::footprint_of(o.pose, o.dims);
    if (geom::segment_hits_box(a, b, fp, o.pose.z - o.dims.dz / 2, o.pose.z + o.dims.dz / 2)) {
      return false;
    }
  }
  return true;
}

bool arm_clear(
  const geom::WorldState & world, Arm arm, const Pose3D & tool, std::string_view target)
{
  return geom::arm_clear_of_furniture(world, world.robot(), arm, tool) &&
         geom::arm_clear_of_objects(world, world.robot(), arm, tool, target);
}

}  // namespace

std::string_view to_string(Backend backend)
{
  return backend == Backend::projected ? "projected" : "simulated-real";
}

Executor::Executor(geom::WorldState & belief, std::uint64_t seed)
: backend_(Backend::projected), belief_(&belief), rng_(seed)
{
  settings_.noise = geom::NoiseModel::none();
  settings_.p_navigation_goal_not_reached = 0.0;
  settings_.p_manipulation_goal_not_reached = 0.0;
}

Executor::Executor(
  geom::WorldState & truth, geom::WorldState & belief, const ExecutionSettings & settings,
  std::uint64_t seed)
: backend_(Backend::simulated_real), truth_(&truth), belief_(&belief), settings_(settings),
  rng_(seed)
{
  if (&truth == &belief) {
    throw InvalidArgument("simulated-real execution needs separate truth and belief worlds");
  }
  if (settings.control_rate <= 0.0 || settings.base_speed <= 0.0 || settings.arm_speed <= 0.0 ||
    settings.base_turn_speed <= 0.0 || settings.head_speed <= 0.0)
  {
    throw InvalidArgument("control rate and speeds must be positive");
  }
  if (settings.real_time_factor < 0.0) {
    throw InvalidArgument("real-time factor must not be negative");
  }
}

void Executor::tick()
{
  ++control_cycles_;
  if (settings_.real_time_factor <= 0.0) {
    return;
  }
  const auto period = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
    std::chrono::duration<double>(1.0 / (settings_.control_rate * settings_.real_time_factor)));
  const auto now = std::chrono::steady_clock::now();
  // Idle time between motions is not made up for.
  if (next_cycle_ + period < now) {
    next_cycle_ = now;
  }
  std::this_thread::sleep_until(next_cycle_);
  next_cycle_ += period;
}

std::uint64_t Executor::cycles_for(double duration) const
{
  return std::max<std::uint64_t>(
    1, static_cast<std::uint64_t>(std::ceil(duration * settings_.control_rate)));
}

StepResult Executor::navigate(const Pose2D & goal)
{
  ++primitives_;
  geom::WorldState & world = sim();
  const Pose2D start = world.robot().base;
  if (!geom::within_bounds(world, goal)) {
    return failure(FailureKind::navigation_pose_unreachable, "goal outside the map " + pose_text(goal));
  }
  if (!geom::base_collision_free(world, goal)) {
    return failure(FailureKind::navigation_pose_in_collision, "base collides at " + pose_text(goal));
  }
  // Both backends refuse goals the straight-line planner cannot connect.
  if (!geom::base_path_clear(world, start, goal)) {
    return failure(FailureKind::navigation_pose_unreachable, "no free path to " + pose_text(goal));
  }
  if (backend_ == Backend::projected) {
    tuck_free_arms();
    world.apply(geom::motion::SetBase{goal});
    return std::nullopt;
  }
  tuck_free_arms();

  const double dist = planar_distance(start, goal);
  const double turn = std::abs(normalize_angle(goal.theta - start.theta));
  const std::uint64_t n = cycles_for(
    std::max(dist / settings_.base_speed, turn / settings_.base_turn_speed));
  Pose2D reached = start;
  StepResult result;
  for (std::uint64_t k = 1; k <= n; ++k) {
    tick();
    const Pose2D p = k == n ? goal : lerp(start, goal, static_cast<double>(k) / static_cast<double>(n));
    if (!geom::base_collision_free(world, p)) {
      result = failure(
        FailureKind::navigation_pose_unreachable, "path blocked near " + pose_text(p));
      break;
    }
    world.apply(geom::motion::SetBase{p});
    reached = p;
  }
  belief_->apply(geom::motion::SetBase{reached});
  if (!result && rng_.bernoulli(settings_.p_navigation_goal_not_reached)) {
    result = failure(FailureKind::navigation_goal_not_reached, "controller gave up near " + pose_text(goal));
  }
  return result;
}

void Executor::tuck_free_arms()
{
  geom::WorldState & world = sim();
  for (Arm arm : {Arm::left, Arm::right}) {
    const geom::ArmState & a = world.robot().arm(arm);
    if (!a.tool || a.attachment) {
      continue;
    }
    if (backend_ == Backend::simulated_real) {
      const Pose3D start = *a.tool;
      const Pose3D park = world.robot().park_pose(arm);
      const std::uint64_t n = cycles_for(distance3d(start, park) / settings_.arm_speed);
      for (std::uint64_t k = 1; k < n; ++k) {
        tick();
        world.apply(
          geom::motion::SetTool{arm, lerp(start, park, static_cast<double>(k) / static_cast<double>(n))});
      }
      tick();
    }
    world.apply(geom::motion::SetTool{arm, std::nullopt});
    if (truth_) {
      belief_->apply(geom::motion::SetTool{arm, std::nullopt});
    }
  }
}

StepResult Executor::look_at(const Pose3D & target)
{
  ++primitives_;
  geom::WorldState & world = sim();
  const geom::RobotState & robot = world.robot();
  const double bearing = std::atan2(target.y - robot.base.y, target.x - robot.base.x);
  const double yaw = normalize_angle(bearing - robot.base.theta);
  if (std::abs(yaw) > robot.geometry.max_head_yaw) {
    return failure(FailureKind::ptu_goal_unreachable, "head yaw out of range for " + pose_text(target));
  }
  const double pitch = std::atan2(
    target.z - robot.geometry.eye_height,
    std::hypot(target.x - robot.base.x, target.y - robot.base.y));
  if (backend_ == Backend::simulated_real) {
    const double y0 = robot.head_yaw;
    const double p0 = robot.head_pitch;
    const std::uint64_t n = cycles_for(
      std::max(std::abs(yaw - y0), std::abs(pitch - p0)) / settings_.head_speed);
    for (std::uint64_t k = 1; k <= n; ++k) {
      tick();
      const double t = static_cast<double>(k) / static_cast<double>(n);
      world.apply(geom::motion::SetHead{y0 + t * (yaw - y0), p0 + t * (pitch - p0)});
    }
    belief_->apply(geom::motion::SetHead{yaw, pitch});
  } else {
    world.apply(geom::motion::SetHead{yaw, pitch});
  }
  return std::nullopt;
}

DetectResult Executor::detect(std::string_view type, std::string_view expected)
{
  ++primitives_;
  geom::WorldState & world = sim();
  auto seen = geom::detect(world, world.robot().eye(), type, settings_.noise, rng_);
  if (!seen || (!expected.empty() && seen->object != expected)) {
    return failure(
      FailureKind::perception_object_not_found, "no " + std::string(type) + " in view");
  }
  if (backend_ == Backend::simulated_real) {
    belief_->update_object_pose(seen->object, seen->pose);
  }
  return *seen;
}

StepResult Executor::move_tool(
  Arm arm, const Pose3D & pose, GraspType grasp, std::string_view target, bool checked)
{
  ++primitives_;
  geom::WorldState & world = sim();
  const Pose3D start = current_tool(world.robot(), arm);
  if (checked && !geom::reachable(world, world.robot(), arm, pose, grasp)) {
    return failure(
      FailureKind::manipulation_pose_unreachable,
      std::string(to_string(arm)) + " arm cannot reach " + pose_text(pose));
  }
  if (backend_ == Backend::projected) {
    if (checked && (!geom::arm_clear_of_objects(world, world.robot(), arm, pose, target) ||
      !tool_path_clear(world, start, pose, target)))
    {
      return failure(
        FailureKind::manipulation_pose_in_collision,
        std::string(to_string(arm)) + " arm collides moving to " + pose_text(pose));
    }
    world.apply(geom::motion::SetTool{arm, pose});
    return std::nullopt;
  }

  const std::uint64_t n = cycles_for(distance3d(start, pose) / settings_.arm_speed);
  Pose3D reached = start;
  StepResult result;
  for (std::uint64_t k = 1; k <= n; ++k) {
    tick();
    const Pose3D p = k == n ? pose : lerp(start, pose, static_cast<double>(k) / static_cast<double>(n));
    if (checked && !arm_clear(world, arm, p, target)) {
      result = failure(
        FailureKind::manipulation_pose_in_collision,
        std::string(to_string(arm)) + " arm hit an obstacle near " + pose_text(p));
      break;
    }
    world.apply(geom::motion::SetTool{arm, p});
    reached = p;
  }
  if (world.robot().arm(arm).tool) {
    belief_->apply(geom::motion::SetTool{arm, reached});
  }
  if (!result && checked && rng_.bernoulli(settings_.p_manipulation_goal_not_reached)) {
    result = failure(
      FailureKind::manipulation_goal_not_reached,
      std::string(to_string(arm)) + " arm stopped short of " + pose_text(pose));
  }
  return result;
}

StepResult Executor::set_gripper(Arm arm, double opening)
{
  ++primitives_;
  const double clamped = std::clamp(opening, 0.0, sim().robot().geometry.max_gripper_opening);
  if (truth_) {
    tick();
    truth_->apply(geom::motion::SetGripper{arm, clamped});
  }
  belief_->apply(geom::motion::SetGripper{arm, clamped});
  return std::nullopt;
}

StepResult Executor::grip(Arm arm, std::string_view object)
{
  ++primitives_;
  geom::WorldState & world = sim();
  const geom::ObjectInstance * o = world.find_object(object);
  const auto & tool = world.robot().arm(arm).tool;
  if (!o || o->attached_to || !tool ||
    geom::distance_to_object(*o, *tool) > geom::kGraspContactTolerance)
  {
    if (truth_) {
      truth_->apply(geom::motion::SetGripper{arm, 0.0});
    }
    belief_->apply(geom::motion::SetGripper{arm, 0.0});
    return failure(
      FailureKind::gripper_closed_completely,
      std::string(to_string(arm)) + " gripper closed on nothing at " +
      (tool ? pose_text(*tool) : std::string("park")));
  }
  if (truth_) {
    tick();
    truth_->apply(geom::motion::Attach{arm, std::string(object)});
  }
  belief_->apply(geom::motion::Attach{arm, std::string(object)});
  return std::nullopt;
}

StepResult Executor::release(Arm arm, double opening)
{
  ++primitives_;
  geom::WorldState & world = sim();
  const auto & held = world.robot().arm(arm).attachment;
  if (!held) {
    throw geom::PreconditionViolation("release: gripper holds nothing");
  }
  const std::string name = *held;
  const geom::ObjectInstance * o = world.find_object(name);
  const Pose3D at = o->pose;
  if (!geom::stable_placement(world, *o, at)) {
    return failure(
      FailureKind::manipulation_pose_in_collision, name + " would not rest stably at " + pose_text(at));
  }
  if (truth_) {
    tick();
    truth_->apply(geom::motion::Detach{arm, at});
    truth_->apply(geom::motion::SetGripper{arm, opening});
  }
  const geom::ObjectInstance * b = belief_->find_object(name);
  belief_->apply(geom::motion::Detach{arm, b->pose});
  belief_->apply(geom::motion::SetGripper{arm, opening});
  return std::nullopt;
}

}  // namespace fetchproj::plans
