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

#include "fetchproj/projector.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace fetchproj::projector
{

using designator::Kind;
using designator::Quantifier;
using designator::prop;
using designator::sym;

std::vector<Slot> transport_slots()
{
  return {
    Slot{std::string(kFetchRobotLocation), SlotKind::location_description, std::nullopt},
    Slot{std::string(kPickUpAction), SlotKind::action_description, std::nullopt},
    Slot{std::string(kDeliverRobotLocation), SlotKind::location_description, std::nullopt},
    Slot{std::string(kPlaceAction), SlotKind::action_description, std::nullopt},
  };
}

Bindings::Bindings(std::vector<Slot> slots)
: slots_(std::move(slots))
{
}

const Description * Bindings::get(std::string_view name) const
{
  for (const auto & s : slots_) {
    if (s.name == name) {
      return s.value ? &*s.value : nullptr;
    }
  }
  return nullptr;
}

void Bindings::bind(std::string_view name, Description value)
{
  for (auto & s : slots_) {
    if (s.name != name) {
      continue;
    }
    if (s.value) {
      throw InvalidArgument("slot '" + s.name + "' is already bound");
    }
    const Kind expected = s.kind == SlotKind::location_description ? Kind::location : Kind::action;
    if (value.kind() != expected) {
      throw InvalidArgument("slot '" + s.name + "' has the wrong description kind");
    }
    s.value = std::move(value);
    return;
  }
  throw InvalidArgument("unknown slot '" + std::string(name) + "'");
}

bool Bindings::any_bound() const
{
  return std::any_of(slots_.begin(), slots_.end(), [](const Slot & s) {return s.value.has_value();});
}

namespace
{

Description keep_only(const Description & d, std::initializer_list<std::string_view> keys)
{
  std::vector<designator::Property> props;
  for (const auto & p : d.properties()) {
    if (p.key == "type" || std::find(keys.begin(), keys.end(), p.key) != keys.end()) {
      props.push_back(p);
    }
  }
  return designator::make_description(d.kind(), d.quantifier(), std::move(props));
}

Description robot_location(const Pose2D & pose)
{
  return designator::make_description(
    Kind::location, Quantifier::a, {prop("type", sym("robot-location")), prop("pose", pose)});
}

}  // namespace

std::optional<FetchDeliverParams> extract_parameters(const TaskTree & tree)
{
  const auto found = introspect::successful_fetch_and_deliver_params(tree, {});
  if (!found) {
    return std::nullopt;
  }
  return FetchDeliverParams{
    keep_only(found->pick_nav, {"pose"}),
    keep_only(found->pick, {"arm", "grasp"}),
    keep_only(found->place_nav, {"pose"}),
    keep_only(found->place, {"arm", "grasp"})};
}

std::vector<Description> projection_root_parameters(const Pose2D & start)
{
  return {robot_location(start)};
}

double cost_by_distance(const TaskTree & tree)
{
  if (!extract_parameters(tree)) {
    return kInfiniteCost;
  }
  const auto & root_params = tree.root().parameters;
  if (root_params.empty() || !root_params.front().get_as<Pose2D>("pose")) {
    throw InvalidArgument("projection tree lacks the robot's start location");
  }
  Pose2D at = *root_params.front().get_as<Pose2D>("pose");
  double cost = 0.0;
  auto gen = introspect::action_subtasks(tree, {}, std::string("navigating")).begin();
  while (auto b = gen()) {
    if (b->node->status != tasktree::TaskStatus::succeeded) {
      continue;
    }
    if (const Pose2D * p = b->action.get_as<Pose2D>("pose")) {
      cost += planar_distance(at, *p);
      at = *p;
    }
  }
  return cost;
}

std::optional<CostFunction> cost_function(std::string_view name)
{
  if (name == "distance") {
    return CostFunction(cost_by_distance);
  }
  return std::nullopt;
}

std::optional<std::size_t> select_winner(const std::vector<Candidate> & candidates)
{
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Candidate & c = candidates[i];
    if (!c.success() || !std::isfinite(c.cost)) {
      continue;
    }
    if (!best || c.cost < candidates[*best].cost ||
      (c.cost == candidates[*best].cost && c.run_index < candidates[*best].run_index))
    {
      best = i;
    }
  }
  return best;
}

Bindings bindings_from(const FetchDeliverParams & params, std::vector<Slot> slots)
{
  Bindings b(std::move(slots));
  const auto bind_if_present = [&](std::string_view name, Description value) {
      for (const auto & s : b.slots()) {
        if (s.name == name) {
          b.bind(name, std::move(value));
          return;
        }
      }
    };
  if (const Pose2D * p = params.pick_nav.get_as<Pose2D>("pose")) {
    bind_if_present(kFetchRobotLocation, robot_location(*p));
  }
  bind_if_present(kPickUpAction, params.pick);
  if (const Pose2D * p = params.place_nav.get_as<Pose2D>("pose")) {
    bind_if_present(kDeliverRobotLocation, robot_location(*p));
  }
  bind_if_present(kPlaceAction, params.place);
  return b;
}

namespace
{

// Puts the belief back even when a run throws.
class RestoreGuard
{
public:
  explicit RestoreGuard(geom::WorldState & world)
  : world_(world), token_(world.snapshot()) {}
  ~RestoreGuard() {world_.restore(token_);}
  RestoreGuard(const RestoreGuard &) = delete;
  RestoreGuard & operator=(const RestoreGuard &) = delete;

private:
  geom::WorldState & world_;
  geom::SnapshotToken token_;
};

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Candidate project_once(
  const std::vector<Slot> & slots, int run_index, const CostFunction & cost, const Body & body,
  geom::WorldState & belief, const plans::PlanSettings & settings, std::uint64_t seed)
{
  RestoreGuard guard(belief);
  plans::Executor exec(belief, seed);
  tasktree::TaskRecorder recorder(projection_root_parameters(belief.robot().base));
  PlanContext ctx{exec, recorder, settings};
  const Bindings unbound(slots);
  body(ctx, RunInfo{true, run_index, unbound});
  TaskTree tree = recorder.finalize();
  auto params = extract_parameters(tree);
  const double c = params ? cost(tree) : kInfiniteCost;
  if (!std::isfinite(c)) {
    params.reset();
  }
  return Candidate{run_index, std::move(tree), std::move(params), c};
}

std::vector<Candidate> project(
  const std::vector<Slot> & slots, int n_runs, const CostFunction & cost, const Body & body,
  geom::WorldState & belief, const plans::PlanSettings & settings, std::uint64_t master_seed)
{
  if (n_runs < 1) {
    throw InvalidArgument("projection needs at least one run");
  }
  std::vector<Candidate> out;
  out.reserve(static_cast<std::size_t>(n_runs));
  for (int i = 1; i <= n_runs; ++i) {
    out.push_back(
      project_once(
        slots, i, cost, body, belief, settings,
        derive_seed(master_seed, static_cast<std::uint64_t>(i))));
  }
  return out;
}

ProjectionResult with_projected_task_tree(
  std::vector<Slot> slots, int n_runs, const CostFunction & cost, const Body & body,
  PlanContext & real, std::uint64_t master_seed)
{
  geom::WorldState & belief = real.exec.belief();
  const geom::WorldContents before = belief.contents();

  const Description phase = designator::make_description(
    Kind::action, Quantifier::an,
    {prop("type", sym("projecting")), prop("runs", static_cast<double>(n_runs))});
  const tasktree::TaskHandle h = real.recorder.open_task("projecting", {phase});

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<Candidate> candidates = project(
    slots, n_runs, cost, body, belief, real.settings, master_seed);
  const double projection_seconds = seconds_since(t0);
  const bool restored = belief.contents() == before;

  const auto winner = select_winner(candidates);
  const auto successes = std::count_if(
    candidates.begin(), candidates.end(), [](const Candidate & c) {return c.success();});
  std::vector<designator::Property> summary{prop("successful-runs", static_cast<double>(successes))};
  if (winner) {
    summary.push_back(prop("winner", static_cast<double>(candidates[*winner].run_index)));
    summary.push_back(prop("cost", candidates[*winner].cost));
  }
  real.recorder.close_task(h, tasktree::result::Succeeded{designator::extend(phase, std::move(summary))});
  Bindings bound = winner && candidates[*winner].parameters ?
    bindings_from(*candidates[*winner].parameters, slots) : Bindings(slots);

  const auto t1 = std::chrono::steady_clock::now();
  Outcome outcome = body(real, RunInfo{false, 0, bound});
  const double execution_seconds = seconds_since(t1);

  return ProjectionResult{
    std::move(outcome), std::move(candidates), winner, std::move(bound), restored,
    projection_seconds, execution_seconds};
}

}  // namespace fetchproj::projector
