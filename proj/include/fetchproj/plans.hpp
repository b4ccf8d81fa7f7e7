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

#ifndef FETCHPROJ__PLANS_HPP_
#define FETCHPROJ__PLANS_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "fetchproj/executor.hpp"
#include "fetchproj/projector.hpp"
#include "fetchproj/task_tree.hpp"

/// Fetch, deliver and transport plans with failure recovery.
///
/// Every plan runs through perform(), which opens a task labelled with the
/// action type, dispatches to the plan and closes the task with its outcome.
/// The same plan code drives both executor backends.
namespace fetchproj::plans
{

using PlanOutcome = tasktree::Outcome;

class UnknownActionType : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline bool succeeded(const PlanOutcome & o) {return std::holds_alternative<Description>(o);}
inline const Failure * failure_of(const PlanOutcome & o) {return std::get_if<Failure>(&o);}

// Description builders used by the plans and their callers.
Description object_description(const std::string & type);
/// Somewhere on a named surface.
Description surface_location(const std::string & surface);
/// A pose on a named surface.
Description placement_location(const std::string & surface, const Pose3D & pose);
/// A concrete base pose.
Description robot_location(const Pose2D & pose);
Description searching_action(const Description & object, const Description & location);
Description fetching_action(
  const Description & object, const Description * robot_location = nullptr,
  const Description * pick_up_action = nullptr);
Description delivering_action(
  const Description & object, const Description & target,
  const Description * robot_location = nullptr, const Description * place_action = nullptr);
Description picking_up_action(
  const Description & object, std::optional<Arm> arm = {}, std::optional<GraspType> grasp = {});
Description placing_action(const Description & object, Arm arm, GraspType grasp);
Description transporting_action(
  const Description & object, const Description & search_location,
  const Description & delivering_location);

/// Opens a task for `action`, runs its plan and records the outcome.
/// Throws UnknownActionType when no plan handles the action's type.
PlanOutcome perform(PlanContext & ctx, const Description & action);

PlanOutcome plan_search(PlanContext & ctx, const Description & object, const Description & location);
PlanOutcome plan_fetch(
  PlanContext & ctx, const Description & object, const Description * robot_location = nullptr,
  const Description * pick_up_action = nullptr);
PlanOutcome plan_pick_up(PlanContext & ctx, const Description & pick_up_action);
PlanOutcome plan_deliver(
  PlanContext & ctx, const Description & object, const Description & target,
  const Description * robot_location = nullptr, const Description * place_action = nullptr);
PlanOutcome plan_place(
  PlanContext & ctx, const Description & object, const Pose3D & placement,
  const Description & place_action);

struct ProjectionSettings
{
  bool enabled{false};
  int n_runs{4};
  std::string cost_fn{"distance"};
  std::uint64_t master_seed{0};
};

struct TransportResult
{
  PlanOutcome outcome;
  // Present when the projection phase ran.
  std::optional<projector::ProjectionResult> projection;
  // Wall-clock seconds spent executing for real (projection excluded).
  double execution_seconds{0.0};
};

/// Fetch followed by deliver of an already found object, reading the
/// projection slots from the run's bindings.
projector::Body fetch_and_deliver_body(const Description & object, const Description & target);

/// Searches the object, then fetches and delivers it, optionally choosing
/// the fetch/deliver parameters by projection first.
TransportResult plan_transport(
  PlanContext & ctx, const Description & object, const Description & search_location,
  const Description & delivering_location, const ProjectionSettings & projection);

}  // namespace fetchproj::plans

#endif  // FETCHPROJ__PLANS_HPP_
