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

#ifndef FETCHPROJ__PROJECTOR_HPP_
#define FETCHPROJ__PROJECTOR_HPP_

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fetchproj/executor.hpp"
#include "fetchproj/introspect.hpp"
#include "fetchproj/task_tree.hpp"

/// Projection-guided parameter selection.
///
/// A plan segment is run several times against the belief world with the
/// projected executor. Each run's task tree is mined for the parameters it
/// used, scored, and the cheapest successful parameterization is bound into
/// the segment before it runs for real.
namespace fetchproj::projector
{

using designator::Description;
using introspect::FetchDeliverParams;
using plans::PlanContext;
using tasktree::Outcome;
using tasktree::TaskTree;

enum class SlotKind { location_description, action_description };

struct Slot
{
  std::string name;
  SlotKind kind;
  std::optional<Description> value;
};

inline constexpr std::string_view kFetchRobotLocation = "fetch-robot-location";
inline constexpr std::string_view kPickUpAction = "pick-up-action";
inline constexpr std::string_view kDeliverRobotLocation = "deliver-robot-location";
inline constexpr std::string_view kPlaceAction = "place-action";

/// The four slots optimized around fetch and deliver, all unbound.
std::vector<Slot> transport_slots();

/// Slot values handed to a plan segment.
class Bindings
{
public:
  explicit Bindings(std::vector<Slot> slots = transport_slots());

  const Description * get(std::string_view name) const;
  /// Binds a slot once; rebinding throws InvalidArgument.
  void bind(std::string_view name, Description value);
  const std::vector<Slot> & slots() const {return slots_;}
  bool any_bound() const;

private:
  std::vector<Slot> slots_;
};

/// What the body learns about the run it is part of.
struct RunInfo
{
  bool projected;
  // 1-based projection run index; 0 for the real execution.
  int run_index;
  const Bindings & bindings;
};

using Body = std::function<Outcome(PlanContext &, const RunInfo &)>;
using CostFunction = std::function<double(const TaskTree &)>;

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

struct Candidate
{
  int run_index;
  TaskTree tree;
  std::optional<FetchDeliverParams> parameters;
  double cost;

  bool success() const {return parameters.has_value();}
};

/// Successful fetch/deliver parameters reduced to what is worth reusing:
/// the base poses of the two navigations, and the arm and grasp type.
std::optional<FetchDeliverParams> extract_parameters(const TaskTree & tree);

/// Sum of base displacements over the succeeded navigations, starting from
/// the pose recorded in the root's parameters; +inf for unsuccessful trees.
double cost_by_distance(const TaskTree & tree);

/// Looks up a cost function by name ("distance"); nullopt when unknown.
std::optional<CostFunction> cost_function(std::string_view name);

/// Root parameters of a projection tree: the robot's starting location.
std::vector<Description> projection_root_parameters(const Pose2D & start);

/// Index of the cheapest successful candidate (lowest run index on ties).
std::optional<std::size_t> select_winner(const std::vector<Candidate> & candidates);

/// Fills `slots` from a winning candidate's parameters.
Bindings bindings_from(const FetchDeliverParams & params, std::vector<Slot> slots = transport_slots());

struct ProjectionResult
{
  Outcome outcome;
  std::vector<Candidate> candidates;
  std::optional<std::size_t> winner;
  Bindings bound;
  // Belief deep-equal before and after the projection phase.
  bool belief_restored{true};
  double projection_seconds{0.0};
  double execution_seconds{0.0};
};

/// Runs `body` n_runs times in projection on the belief of `real`, each run
/// with its own seed derived from master_seed, then once on `real` with the
/// winning bindings (or unbound when no run succeeded).
ProjectionResult with_projected_task_tree(
  std::vector<Slot> slots, int n_runs, const CostFunction & cost, const Body & body,
  PlanContext & real, std::uint64_t master_seed);

/// The projection phase alone: candidates from n_runs projected runs.
/// The belief world is restored after every run.
std::vector<Candidate> project(
  const std::vector<Slot> & slots, int n_runs, const CostFunction & cost, const Body & body,
  geom::WorldState & belief, const plans::PlanSettings & settings, std::uint64_t master_seed);

/// One projected run with an explicit seed.
Candidate project_once(
  const std::vector<Slot> & slots, int run_index, const CostFunction & cost, const Body & body,
  geom::WorldState & belief, const plans::PlanSettings & settings, std::uint64_t seed);

}  // namespace fetchproj::projector

#endif  // FETCHPROJ__PROJECTOR_HPP_
