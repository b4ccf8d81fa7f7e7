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

#ifndef FETCHPROJ__EXECUTOR_HPP_
#define FETCHPROJ__EXECUTOR_HPP_

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "fetchproj/core.hpp"
#include "fetchproj/designator.hpp"
#include "fetchproj/task_tree.hpp"
#include "fetchproj/world.hpp"

namespace fetchproj::plans
{

using designator::Description;
using tasktree::Failure;
using tasktree::FailureKind;

enum class Backend { projected, simulated_real };

std::string_view to_string(Backend backend);

/// Parameters of the simulated-real backend. The projected backend ignores
/// all of them: it runs noise-free and never samples controller failures.
struct ExecutionSettings
{
  geom::NoiseModel noise{};
  double p_navigation_goal_not_reached{0.05};
  double p_manipulation_goal_not_reached{0.05};
  // Control loop of the simulated robot.
  double control_rate{1000.0};   // Hz
  double base_speed{0.5};        // m/s
  double base_turn_speed{1.0};   // rad/s
  double arm_speed{0.25};        // m/s
  double head_speed{1.5};        // rad/s
  // Wall-clock pacing of the control loop: 1 runs at the robot's physical
  // pace, 2 twice as fast, 0 as fast as the host allows.
  double real_time_factor{0.0};
};

/// Outcome of one primitive: nullopt on success.
using StepResult = std::optional<Failure>;
using DetectResult = std::variant<geom::Detection, Failure>;

/// Low-level motions with two interchangeable implementations.
///
/// The projected backend teleports the belief world between key poses and
/// checks feasibility analytically. The simulated-real backend drives a
/// separate ground-truth world through a fixed-rate control loop, checks
/// collisions on every cycle, perceives with noise, and mirrors the result
/// into the belief world.
class Executor
{
public:
  /// Projected backend over `belief`.
  Executor(geom::WorldState & belief, std::uint64_t seed);
  /// Simulated-real backend; `truth` and `belief` must be distinct worlds.
  Executor(
    geom::WorldState & truth, geom::WorldState & belief, const ExecutionSettings & settings,
    std::uint64_t seed);

  Backend backend() const {return backend_;}
  geom::WorldState & belief() {return *belief_;}
  const geom::WorldState & belief() const {return *belief_;}
  /// Ground truth (simulated-real only).
  const geom::WorldState * truth() const {return truth_;}
  Rng & rng() {return rng_;}
  const ExecutionSettings & settings() const {return settings_;}

  std::uint64_t primitives() const {return primitives_;}
  std::uint64_t control_cycles() const {return control_cycles_;}

  /// Arms that hold nothing are tucked before the base moves.
  StepResult navigate(const Pose2D & goal);
  StepResult look_at(const Pose3D & target);
  /// Detects an object of `type`; when `expected` is set only that object counts.
  DetectResult detect(std::string_view type, std::string_view expected = {});
  /// Moves the tool of `arm` to `pose`. With `checked`, the key pose must be
  /// reachable for `grasp` and the motion collision-free; `target` names the
  /// object being manipulated, which the arm may touch.
  StepResult move_tool(
    Arm arm, const Pose3D & pose, GraspType grasp, std::string_view target, bool checked = true);
  StepResult set_gripper(Arm arm, double opening);
  /// Closes the gripper on `object` and attaches it.
  StepResult grip(Arm arm, std::string_view object);
  /// Releases the held object where it currently is.
  StepResult release(Arm arm, double opening);

private:
  geom::WorldState & sim() {return truth_ ? *truth_ : *belief_;}
  std::uint64_t cycles_for(double duration) const;
  void tuck_free_arms();
  // Counts one control cycle and waits for its slot when paced.
  void tick();

  Backend backend_;
  geom::WorldState * truth_{nullptr};
  geom::WorldState * belief_;
  ExecutionSettings settings_;
  Rng rng_;
  std::uint64_t primitives_{0};
  std::uint64_t control_cycles_{0};
  std::chrono::steady_clock::time_point next_cycle_{};
};

struct RetryLimits
{
  int search{4};
  int fetch{20};
  int deliver_outer{8};
  int deliver_inner{4};
  int sample_attempts{designator::kDefaultSampleAttempts};

  bool operator==(const RetryLimits &) const = default;
};

/// Knobs of the plan library.
struct PlanSettings
{
  RetryLimits retries;
  designator::ParameterTable parameters = designator::default_parameter_table();
  // Base-to-object distance band used when sampling pick-up locations.
  double fetch_radius_min{0.4};
  double fetch_radius_max{1.1};
  // Distance band for search locations.
  double search_radius_min{0.6};
  double search_radius_max{2.0};
  // Base-to-goal distance band used when sampling delivery locations.
  double deliver_radius_min{0.4};
  double deliver_radius_max{1.1};
  // Placement retries scatter uniformly within this distance of the goal.
  double placement_jitter{0.1};
  // Cap on (arm, grasp) combinations tried per base location; 0 means all.
  int max_grasp_combos{0};
};

/// Everything a plan needs while it runs.
struct PlanContext
{
  Executor & exec;
  tasktree::TaskRecorder & recorder;
  const PlanSettings & settings;
};

}  // namespace fetchproj::plans

#endif  // FETCHPROJ__EXECUTOR_HPP_
