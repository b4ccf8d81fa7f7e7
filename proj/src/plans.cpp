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

#include "fetchproj/plans.hpp"

#include <chrono>
#include <functional>
#include <map>

namespace fetchproj::plans
{

using designator::Kind;
using designator::Quantifier;
using designator::nest;
using designator::prop;
using designator::sym;
using tasktree::TaskHandle;
using tasktree::TaskResult;
namespace result = tasktree::result;

// ---------------------------------------------------------------------------
// Description builders

Description object_description(const std::string & type)
{
  return designator::make_description(Kind::object, Quantifier::an, {prop("type", sym(type))});
}

Description surface_location(const std::string & surface)
{
  return designator::make_description(
    Kind::location, Quantifier::a,
    {prop("type", sym("surface-location")), prop("surface", sym(surface))});
}

Description placement_location(const std::string & surface, const Pose3D & pose)
{
  return designator::make_description(
    Kind::location, Quantifier::a,
    {prop("type", sym("placement")), prop("surface", sym(surface)), prop("pose", pose)});
}

Description robot_location(const Pose2D & pose)
{
  return designator::make_description(
    Kind::location, Quantifier::a, {prop("type", sym("robot-location")), prop("pose", pose)});
}

Description searching_action(const Description & object, const Description & location)
{
  return designator::make_description(
    Kind::action, Quantifier::an,
    {prop("type", sym("searching")), prop("object", nest(object)), prop("location", nest(location))});
}

Description fetching_action(
  const Description & object, const Description * robot_location, const Description * pick_up_action)
{
  std::vector<designator::Property> props{prop("type", sym("fetching")), prop("object", nest(object))};
  if (robot_location) {
    props.push_back(prop("robot-location", nest(*robot_location)));
  }
  if (pick_up_action) {
    props.push_back(prop("pick-up-action", nest(*pick_up_action)));
  }
  return designator::make_description(Kind::action, Quantifier::an, std::move(props));
}

Description delivering_action(
  const Description & object, const Description & target,
  const Description * robot_location, const Description * place_action)
{
  std::vector<designator::Property> props{
    prop("type", sym("delivering")), prop("object", nest(object)), prop("target", nest(target))};
  if (robot_location) {
    props.push_back(prop("robot-location", nest(*robot_location)));
  }
  if (place_action) {
    props.push_back(prop("place-action", nest(*place_action)));
  }
  return designator::make_description(Kind::action, Quantifier::an, std::move(props));
}

Description picking_up_action(
  const Description & object, std::optional<Arm> arm, std::optional<GraspType> grasp)
{
  std::vector<designator::Property> props{prop("type", sym("picking-up")), prop("object", nest(object))};
  if (arm) {
    props.push_back(prop("arm", sym(std::string(to_string(*arm)))));
  }
  if (grasp) {
    props.push_back(prop("grasp", sym(std::string(to_string(*grasp)))));
  }
  return designator::make_description(Kind::action, Quantifier::an, std::move(props));
}

Description placing_action(const Description & object, Arm arm, GraspType grasp)
{
  return designator::make_description(
    Kind::action, Quantifier::an,
    {prop("type", sym("placing")), prop("object", nest(object)),
      prop("arm", sym(std::string(to_string(arm)))),
      prop("grasp", sym(std::string(to_string(grasp))))});
}

Description transporting_action(
  const Description & object, const Description & search_location,
  const Description & delivering_location)
{
  return designator::make_description(
    Kind::action, Quantifier::an,
    {prop("type", sym("transporting")), prop("object", nest(object)),
      prop("search-location", nest(search_location)),
      prop("delivering-location", nest(delivering_location))});
}

namespace
{

PlanOutcome fail(FailureKind kind, std::string context)
{
  return Failure{kind, std::move(context)};
}

TaskResult to_result(const PlanOutcome & o)
{
  if (const Failure * f = failure_of(o)) {
    return result::Failed{*f};
  }
  return result::Succeeded{std::get<Description>(o)};
}

template<typename F>
auto primitive(PlanContext & ctx, F && f)
{
  auto r = f();
  ctx.recorder.tick();
  return r;
}

const Description & required_nested(const Description & d, std::string_view key)
{
  const Description * n = d.nested(key);
  if (!n) {
    throw InvalidArgument(
            "action '" + d.type() + "' lacks the '" + std::string(key) + "' description");
  }
  return *n;
}

std::optional<Arm> arm_property(const Description & d)
{
  const auto s = d.symbol("arm");
  return s ? std::optional<Arm>(parse_arm(*s)) : std::nullopt;
}

std::optional<GraspType> grasp_property(const Description & d)
{
  const auto s = d.symbol("grasp");
  return s ? std::optional<GraspType>(parse_grasp(*s)) : std::nullopt;
}

std::string arm_name(Arm a) {return std::string(to_string(a));}
std::string grasp_name(GraspType g) {return std::string(to_string(g));}

// Current belief about the object a description refers to.
const geom::ObjectInstance & believed_object(PlanContext & ctx, const Description & object)
{
  const auto name = object.symbol("name");
  if (!name) {
    throw InvalidArgument("object description carries no name");
  }
  const geom::ObjectInstance * o = ctx.exec.belief().find_object(*name);
  if (!o) {
    throw InvalidArgument("unknown object '" + *name + "'");
  }
  return *o;
}

Description point_location(const Pose3D & pose)
{
  return designator::make_description(
    Kind::location, Quantifier::a, {prop("type", sym("point")), prop("pose", pose)});
}

// A base location still to be sampled around `reference`.
Description sampled_location(
  std::string_view constraint, const Pose3D & reference, double r_min, double r_max,
  bool also_visible)
{
  std::vector<designator::Property> props{
    prop("type", sym("robot-location")), prop(std::string(constraint), reference)};
  if (also_visible) {
    props.push_back(prop("visible-from", reference));
  }
  props.push_back(prop("min-distance", r_min));
  props.push_back(prop("max-distance", r_max));
  return designator::make_description(Kind::location, Quantifier::a, std::move(props));
}

Description simple_action(const std::string & type, std::vector<designator::Property> extra)
{
  std::vector<designator::Property> props{prop("type", sym(type))};
  for (auto & p : extra) {
    props.push_back(std::move(p));
  }
  return designator::make_description(Kind::action, Quantifier::an, std::move(props));
}

// Runs one primitive as its own task.
PlanOutcome primitive_task(
  PlanContext & ctx, const Description & action, const std::function<StepResult()> & step)
{
  const TaskHandle h = ctx.recorder.open_task(action.type(), {action});
  const StepResult r = primitive(ctx, step);
  if (r) {
    ctx.recorder.close_task(h, result::Failed{*r});
    return *r;
  }
  ctx.recorder.close_task(h, result::Succeeded{});
  return action;
}

struct Branch
{
  Description action;
  std::vector<std::function<StepResult()>> steps;
};

// Cooperative parallel block: one primitive per turn, left branch first.
// Branches waiting for their turn are suspended. The first failure
// evaporates the unfinished siblings.
StepResult run_parallel(PlanContext & ctx, std::vector<Branch> branches)
{
  auto & rec = ctx.recorder;
  const TaskHandle parent = rec.current();
  std::vector<TaskHandle> handles;
  for (const auto & b : branches) {
    handles.push_back(rec.open_task_under(parent, b.action.type(), {b.action}));
    rec.set_current(parent);
  }
  std::vector<std::size_t> next(branches.size(), 0);
  std::vector<bool> done(branches.size(), false);
  for (std::size_t i = 0; i < branches.size(); ++i) {
    if (branches[i].steps.empty()) {
      rec.close_task(handles[i], result::Succeeded{});
      done[i] = true;
    }
  }
  const auto running = [&](std::size_t i) {
      return rec.node(handles[i]).status == tasktree::TaskStatus::running;
    };
  while (std::find(done.begin(), done.end(), false) != done.end()) {
    for (std::size_t i = 0; i < branches.size(); ++i) {
      if (done[i]) {
        continue;
      }
      for (std::size_t j = 0; j < branches.size(); ++j) {
        if (j != i && !done[j] && running(j)) {
          rec.suspend(handles[j]);
        }
      }
      if (!running(i)) {
        rec.resume(handles[i]);
      }
      const StepResult r = primitive(ctx, branches[i].steps[next[i]]);
      ++next[i];
      if (r) {
        rec.close_task(handles[i], result::Failed{*r});
        done[i] = true;
        for (std::size_t j = 0; j < branches.size(); ++j) {
          if (!done[j]) {
            rec.close_task(handles[j], result::Evaporated{});
            done[j] = true;
          }
        }
        rec.set_current(parent);
        return r;
      }
      if (next[i] == branches[i].steps.size()) {
        rec.close_task(handles[i], result::Succeeded{});
        done[i] = true;
      }
    }
  }
  rec.set_current(parent);
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Leaf plans

PlanOutcome navigate_plan(PlanContext & ctx, const Description & action)
{
  const Description & loc = required_nested(action, "location");
  Pose2D goal;
  if (const Pose2D * p = loc.get_as<Pose2D>("pose")) {
    goal = *p;
  } else {
    std::vector<designator::LocationConstraint> constraints;
    std::vector<Pose3D> refs;
    const double* r_min = loc.get_as<double>("min-distance");
    const double* r_max = loc.get_as<double>("max-distance");
    if (!r_min || !r_max) {
      throw InvalidArgument("sampled robot location lacks a distance band");
    }
    const Pose3D * reach = loc.get_as<Pose3D>("reachable-for");
    const Pose3D * see = loc.get_as<Pose3D>("visible-from");
    if (reach) {
      refs.push_back(*reach);
      constraints.push_back(
        designator::make_constraint(designator::ConstraintKind::reachable_for, *reach, *r_min, *r_max));
    }
    if (see) {
      if (!reach) {
        refs.push_back(*see);
      }
      constraints.push_back(
        designator::make_constraint(
          designator::ConstraintKind::visible_from, *see,
          reach ? 0.0 : *r_min, reach ? geom::kDetectionRange : *r_max));
    }
    if (refs.empty()) {
      throw InvalidArgument("robot location has neither a pose nor constraints");
    }
    try {
      goal = designator::sample_base_location(
        refs, constraints, ctx.exec.belief(), ctx.exec.rng(), ctx.settings.retries.sample_attempts);
    } catch (const designator::NoValidSample & e) {
      ctx.recorder.tick();
      return fail(FailureKind::navigation_pose_in_collision, e.what());
    }
  }
  const StepResult r = primitive(ctx, [&] {return ctx.exec.navigate(goal);});
  if (r) {
    return *r;
  }
  return designator::extend(action, {prop("pose", goal)});
}

PlanOutcome look_plan(PlanContext & ctx, const Description & action)
{
  const Description & target = required_nested(action, "target");
  const Pose3D * p = target.get_as<Pose3D>("pose");
  if (!p) {
    throw InvalidArgument("looking target has no pose");
  }
  const StepResult r = primitive(ctx, [&] {return ctx.exec.look_at(*p);});
  if (r) {
    return *r;
  }
  return action;
}

PlanOutcome detect_plan(PlanContext & ctx, const Description & action)
{
  const Description & object = required_nested(action, "object");
  const std::string expected = object.symbol("name").value_or("");
  const DetectResult r = primitive(ctx, [&] {return ctx.exec.detect(object.type(), expected);});
  if (const Failure * f = std::get_if<Failure>(&r)) {
    return *f;
  }
  const auto & d = std::get<geom::Detection>(r);
  return designator::extend(action, {prop("name", sym(d.object)), prop("pose", d.pose)});
}

Description found_object(const Description & object, const std::string & name, const Pose3D & pose)
{
  return designator::make_description(
    Kind::object, Quantifier::the,
    {prop("type", sym(object.type())), prop("name", sym(name)), prop("pose", pose)});
}

// ---------------------------------------------------------------------------
// Composite plans

PlanOutcome search_plan(PlanContext & ctx, const Description & action)
{
  const Description & object = required_nested(action, "object");
  const Description & location = required_nested(action, "location");
  const auto surface_name = location.symbol("surface");
  const geom::Body * surface = surface_name ? ctx.exec.belief().find_body(*surface_name) : nullptr;
  if (!surface) {
    throw InvalidArgument("search location must name a known surface");
  }
  const PlanSettings & s = ctx.settings;
  for (int attempt = 0; attempt < s.retries.search; ++attempt) {
    const geom::Rect & fp = surface->footprint;
    const Pose3D spot{
      ctx.exec.rng().uniform(fp.x_min, fp.x_max), ctx.exec.rng().uniform(fp.y_min, fp.y_max),
      surface->z_hi + 0.05, 0.0};
    const Description where = sampled_location(
      "visible-from", spot, s.search_radius_min, s.search_radius_max, false);
    if (!succeeded(perform(ctx, simple_action("navigating", {prop("location", nest(where))})))) {
      continue;
    }
    if (!succeeded(
        perform(ctx, simple_action("looking", {prop("target", nest(point_location(spot)))}))))
    {
      continue;
    }
    const PlanOutcome seen = perform(ctx, simple_action("detecting", {prop("object", nest(object))}));
    if (!succeeded(seen)) {
      continue;
    }
    const Description & d = std::get<Description>(seen);
    const Description found = found_object(object, *d.symbol("name"), *d.get_as<Pose3D>("pose"));
    return designator::extend(action, {prop("found", nest(found))});
  }
  return fail(
    FailureKind::object_nowhere_to_be_found,
    object.type() + " not found on " + *surface_name + " after " +
    std::to_string(s.retries.search) + " attempts");
}

std::vector<std::pair<Arm, GraspType>> grasp_combos(
  PlanContext & ctx, const std::string & type, const Description * preferred)
{
  const auto & robot = ctx.exec.belief().robot();
  const auto & allowed = designator::allowed_grasps(ctx.settings.parameters, type);
  const auto bound_arm = preferred ? arm_property(*preferred) : std::nullopt;
  const auto bound_grasp = preferred ? grasp_property(*preferred) : std::nullopt;
  const Arm first_arm = bound_arm ? *bound_arm :
    designator::choose_arm(object_description(type), robot, ctx.exec.rng());
  const GraspType first_grasp = bound_grasp ? *bound_grasp :
    designator::choose_grasp(ctx.settings.parameters, type, ctx.exec.rng());
  std::vector<std::pair<Arm, GraspType>> combos{{first_arm, first_grasp}};
  for (Arm a : {Arm::left, Arm::right}) {
    if (robot.arm(a).attachment) {
      continue;
    }
    for (GraspType g : allowed) {
      if (a != first_arm || g != first_grasp) {
        combos.emplace_back(a, g);
      }
    }
  }
  const int cap = ctx.settings.max_grasp_combos;
  if (cap > 0 && combos.size() > static_cast<std::size_t>(cap)) {
    combos.resize(static_cast<std::size_t>(cap));
  }
  return combos;
}

PlanOutcome fetch_plan(PlanContext & ctx, const Description & action)
{
  const Description & object = required_nested(action, "object");
  const Description * bound_location = action.nested("robot-location");
  const Description * bound_pick = action.nested("pick-up-action");
  const PlanSettings & s = ctx.settings;

  for (int attempt = 0; attempt < s.retries.fetch; ++attempt) {
    const bool first = attempt == 0;
    const Pose3D estimate = believed_object(ctx, object).pose;
    const Description where = first && bound_location ? *bound_location :
      sampled_location("reachable-for", estimate, s.fetch_radius_min, s.fetch_radius_max, true);
    if (!succeeded(perform(ctx, simple_action("navigating", {prop("location", nest(where))})))) {
      continue;
    }
    if (!succeeded(
        perform(ctx, simple_action("looking", {prop("target", nest(point_location(estimate)))}))))
    {
      continue;
    }
    if (!succeeded(perform(ctx, simple_action("detecting", {prop("object", nest(object))})))) {
      continue;
    }
    for (const auto & [arm, grasp] : grasp_combos(ctx, object.type(), first ? bound_pick : nullptr)) {
      const PlanOutcome picked = perform(ctx, picking_up_action(object, arm, grasp));
      if (succeeded(picked)) {
        return designator::extend(
          action, {prop("arm", sym(arm_name(arm))), prop("grasp", sym(grasp_name(grasp)))});
      }
    }
  }
  return fail(
    FailureKind::object_unfetchable,
    object.type() + " could not be fetched in " + std::to_string(s.retries.fetch) + " attempts");
}

PlanOutcome pick_up_plan(PlanContext & ctx, const Description & action)
{
  const Description & object = required_nested(action, "object");
  const geom::ObjectInstance & o = believed_object(ctx, object);
  const std::string name = o.name;
  const std::string type = o.type;
  const auto & table = ctx.settings.parameters;
  const auto given_arm = arm_property(action);
  const Arm arm = given_arm ? *given_arm :
    designator::choose_arm(object, ctx.exec.belief().robot(), ctx.exec.rng());
  const auto given_grasp = grasp_property(action);
  const GraspType grasp = given_grasp ? *given_grasp :
    designator::choose_grasp(table, type, ctx.exec.rng());
  const auto params = designator::grasp_params(table, type);
  const auto reach = designator::reaching_trajectory(table, type, arm, grasp, o.pose);
  const auto lift = designator::lifting_trajectory(type, arm, grasp, reach);
  const Pose3D pre_grasp = reach.find(designator::KeyPoseLabel::pre_grasp)->pose;
  const Pose3D grasp_pose = reach.find(designator::KeyPoseLabel::grasp)->pose;
  const Pose3D lift_pose = lift.poses().back().pose;
  const auto arm_prop = prop("arm", sym(arm_name(arm)));

  Executor & ex = ctx.exec;
  const StepResult parallel = run_parallel(
    ctx,
    {Branch{
        simple_action("opening-gripper", {arm_prop, prop("gripper-opening", params.gripper_opening)}),
        {[&] {return ex.set_gripper(arm, params.gripper_opening / 2);},
          [&] {return ex.set_gripper(arm, params.gripper_opening);}}},
      Branch{
        simple_action("reaching", {arm_prop, prop("pose", pre_grasp)}),
        {[&] {return ex.move_tool(arm, pre_grasp, grasp, name);}}}});
  if (parallel) {
    return *parallel;
  }
  PlanOutcome r = primitive_task(
    ctx, simple_action("reaching", {arm_prop, prop("pose", grasp_pose)}),
    [&] {return ex.move_tool(arm, grasp_pose, grasp, name);});
  if (!succeeded(r)) {
    return r;
  }
  r = primitive_task(
    ctx, simple_action("gripping", {arm_prop, prop("effort", params.grasping_force)}),
    [&] {return ex.grip(arm, name);});
  if (!succeeded(r)) {
    return r;
  }
  r = primitive_task(
    ctx, simple_action("lifting", {arm_prop, prop("pose", lift_pose)}),
    [&] {return ex.move_tool(arm, lift_pose, grasp, name, false);});
  if (!succeeded(r)) {
    return r;
  }
  std::vector<designator::Property> grounding;
  if (!action.has("arm")) {
    grounding.push_back(arm_prop);
  }
  if (!action.has("grasp")) {
    grounding.push_back(prop("grasp", sym(grasp_name(grasp))));
  }
  grounding.push_back(prop("gripper-opening", params.gripper_opening));
  grounding.push_back(prop("effort", params.grasping_force));
  grounding.push_back(prop("reach-trajectory", reach));
  grounding.push_back(prop("lift-trajectory", lift));
  return designator::extend(action, std::move(grounding));
}

PlanOutcome place_plan(PlanContext & ctx, const Description & action)
{
  const Description & object = required_nested(action, "object");
  const Description & target = required_nested(action, "target");
  const Pose3D * placement = target.get_as<Pose3D>("pose");
  const auto arm = arm_property(action);
  const auto grasp = grasp_property(action);
  if (!placement || !arm || !grasp) {
    throw InvalidArgument("placing needs a target pose, an arm and a grasp");
  }
  const geom::ObjectInstance & o = believed_object(ctx, object);
  const std::string name = o.name;
  const geom::ArmState & held = ctx.exec.belief().robot().arm(*arm);
  if (!held.attachment || *held.attachment != name || !held.grip_offset) {
    throw geom::PreconditionViolation("placing: the " + arm_name(*arm) + " gripper does not hold " + name);
  }
  if (!geom::stable_placement(ctx.exec.belief(), o, *placement)) {
    ctx.recorder.tick();
    return fail(FailureKind::manipulation_pose_in_collision, name + " would not rest stably there");
  }
  const Pose3D tool = designator::tool_pose_for_placement(*held.grip_offset, *placement);
  const auto traj = designator::placing_trajectory(*grasp, tool);
  const Pose3D pre = traj.find(designator::KeyPoseLabel::pre_place)->pose;
  const Pose3D place = traj.find(designator::KeyPoseLabel::place)->pose;
  const Pose3D retract = traj.find(designator::KeyPoseLabel::retract)->pose;
  const auto opening = designator::grasp_params(ctx.settings.parameters, o.type).gripper_opening;
  const auto arm_prop = prop("arm", sym(arm_name(*arm)));
  Executor & ex = ctx.exec;

  PlanOutcome r = primitive_task(
    ctx, simple_action("reaching", {arm_prop, prop("pose", pre)}),
    [&] {return ex.move_tool(*arm, pre, *grasp, name);});
  if (!succeeded(r)) {
    return r;
  }
  r = primitive_task(
    ctx, simple_action("reaching", {arm_prop, prop("pose", place)}),
    [&] {return ex.move_tool(*arm, place, *grasp, name);});
  if (!succeeded(r)) {
    return r;
  }
  r = primitive_task(
    ctx, simple_action("releasing", {arm_prop, prop("gripper-opening", opening)}),
    [&] {return ex.release(*arm, opening);});
  if (!succeeded(r)) {
    return r;
  }
  primitive_task(
    ctx, simple_action("retracting", {arm_prop, prop("pose", retract)}),
    [&] {return ex.move_tool(*arm, retract, *grasp, name, false);});
  return designator::extend(action, {prop("placement", *placement), prop("trajectory", traj)});
}

PlanOutcome deliver_plan(PlanContext & ctx, const Description & action)
{
  const Description & object = required_nested(action, "object");
  const Description & target = required_nested(action, "target");
  const Description * bound_location = action.nested("robot-location");
  const Description * place_action = action.nested("place-action");
  const Pose3D * goal = target.get_as<Pose3D>("pose");
  const auto surface = target.symbol("surface");
  if (!goal || !surface) {
    throw InvalidArgument("delivering target must carry a surface and a pose");
  }
  const std::string name = believed_object(ctx, object).name;
  std::optional<Arm> arm;
  for (Arm a : {Arm::left, Arm::right}) {
    const auto & held = ctx.exec.belief().robot().arm(a).attachment;
    if (held && *held == name) {
      arm = a;
    }
  }
  if (!arm) {
    throw geom::PreconditionViolation("delivering: " + name + " is not in a gripper");
  }
  std::optional<GraspType> grasp = place_action ? grasp_property(*place_action) : std::nullopt;
  if (!grasp) {
    throw InvalidArgument("delivering needs the grasp the object is held with");
  }
  const PlanSettings & s = ctx.settings;

  for (int outer = 0; outer < s.retries.deliver_outer; ++outer) {
    const Description where = outer == 0 && bound_location ? *bound_location :
      sampled_location("reachable-for", *goal, s.deliver_radius_min, s.deliver_radius_max, false);
    if (!succeeded(perform(ctx, simple_action("navigating", {prop("location", nest(where))})))) {
      continue;
    }
    for (int inner = 0; inner < s.retries.deliver_inner; ++inner) {
      Pose3D placement = *goal;
      if (inner > 0) {
        placement.x += ctx.exec.rng().uniform(-s.placement_jitter, s.placement_jitter);
        placement.y += ctx.exec.rng().uniform(-s.placement_jitter, s.placement_jitter);
      }
      Description place = placing_action(object, *arm, *grasp);
      place = designator::extend(
        place, {prop("target", nest(placement_location(*surface, placement)))});
      const PlanOutcome placed = perform(ctx, place);
      if (succeeded(placed)) {
        return designator::extend(action, {prop("placement", placement)});
      }
    }
  }
  return fail(
    FailureKind::object_undeliverable,
    name + " could not be delivered in " +
    std::to_string(s.retries.deliver_outer * s.retries.deliver_inner) + " placement attempts");
}

using Handler = PlanOutcome (*)(PlanContext &, const Description &);

const std::map<std::string, Handler, std::less<>> & handlers()
{
  static const std::map<std::string, Handler, std::less<>> table{
    {"searching", search_plan},
    {"fetching", fetch_plan},
    {"picking-up", pick_up_plan},
    {"delivering", deliver_plan},
    {"placing", place_plan},
    {"navigating", navigate_plan},
    {"looking", look_plan},
    {"detecting", detect_plan},
  };
  return table;
}

}  // namespace

PlanOutcome perform(PlanContext & ctx, const Description & action)
{
  const auto & table = handlers();
  const auto it = table.find(action.type());
  if (it == table.end()) {
    throw UnknownActionType("no plan for actions of type '" + action.type() + "'");
  }
  const TaskHandle h = ctx.recorder.open_task(action.type(), {action});
  PlanOutcome outcome = it->second(ctx, action);
  ctx.recorder.close_task(h, to_result(outcome));
  return outcome;
}

PlanOutcome plan_search(PlanContext & ctx, const Description & object, const Description & location)
{
  return perform(ctx, searching_action(object, location));
}

PlanOutcome plan_fetch(
  PlanContext & ctx, const Description & object, const Description * robot_location,
  const Description * pick_up_action)
{
  return perform(ctx, fetching_action(object, robot_location, pick_up_action));
}

PlanOutcome plan_pick_up(PlanContext & ctx, const Description & pick_up_action)
{
  return perform(ctx, pick_up_action);
}

PlanOutcome plan_deliver(
  PlanContext & ctx, const Description & object, const Description & target,
  const Description * robot_location, const Description * place_action)
{
  return perform(ctx, delivering_action(object, target, robot_location, place_action));
}

PlanOutcome plan_place(
  PlanContext & ctx, const Description & object, const Pose3D & placement,
  const Description & place_action)
{
  std::string support = "surface";
  for (const auto & b : ctx.exec.belief().bodies()) {
    if (b.kind == geom::BodyKind::surface && b.footprint.contains(placement.x, placement.y)) {
      support = b.name;
      break;
    }
  }
  Description action = place_action;
  if (!action.has("object")) {
    action = designator::extend(action, {prop("object", nest(object))});
  }
  action = designator::extend(action, {prop("target", nest(placement_location(support, placement)))});
  return perform(ctx, action);
}

projector::Body fetch_and_deliver_body(const Description & object, const Description & target)
{
  return [object, target](PlanContext & ctx, const projector::RunInfo & run) -> PlanOutcome {
           const PlanOutcome fetched = perform(
             ctx, fetching_action(
               object, run.bindings.get(projector::kFetchRobotLocation),
               run.bindings.get(projector::kPickUpAction)));
           if (!succeeded(fetched)) {
             return fetched;
           }
           const Description & f = std::get<Description>(fetched);
           const Arm arm = *arm_property(f);
           const GraspType grasp = *grasp_property(f);
           Description place = placing_action(object, arm, grasp);
           // A bound place action only helps when it agrees with how the object is held.
           if (const Description * bound = run.bindings.get(projector::kPlaceAction)) {
             if (arm_property(*bound) == arm && grasp_property(*bound) == grasp) {
               place = *bound;
             }
           }
           const Description * location = run.bindings.get(projector::kDeliverRobotLocation);
           return perform(ctx, delivering_action(object, target, location, &place));
         };
}

TransportResult plan_transport(
  PlanContext & ctx, const Description & object, const Description & search_location,
  const Description & delivering_location, const ProjectionSettings & projection)
{
  const auto t0 = std::chrono::steady_clock::now();
  const Description action = transporting_action(object, search_location, delivering_location);
  const TaskHandle h = ctx.recorder.open_task("transporting", {action});

  const PlanOutcome searched = perform(ctx, searching_action(object, search_location));
  if (!succeeded(searched)) {
    ctx.recorder.close_task(h, to_result(searched));
    return TransportResult{
      searched, std::nullopt,
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
  }
  const Description found = *std::get<Description>(searched).nested("found");
  const projector::Body body = fetch_and_deliver_body(found, delivering_location);

  std::optional<projector::ProjectionResult> projected;
  PlanOutcome outcome = searched;
  if (projection.enabled) {
    const auto cost = projector::cost_function(projection.cost_fn);
    if (!cost) {
      throw InvalidArgument("unknown cost function '" + projection.cost_fn + "'");
    }
    projected = projector::with_projected_task_tree(
      projector::transport_slots(), projection.n_runs, *cost, body, ctx, projection.master_seed);
    outcome = projected->outcome;
  } else {
    const projector::Bindings unbound;
    outcome = body(ctx, projector::RunInfo{false, 0, unbound});
  }
  ctx.recorder.close_task(
    h, succeeded(outcome) ? TaskResult{result::Succeeded{action}} : to_result(outcome));
  double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (projected) {
    seconds -= projected->projection_seconds;
  }
  return TransportResult{std::move(outcome), std::move(projected), seconds};
}

}  // namespace fetchproj::plans
