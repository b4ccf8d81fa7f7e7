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

#include "fetchproj/introspect.hpp"

namespace fetchproj::introspect
{

using tasktree::TaskStatus;

Stream<const TaskNode *> tasks(const TaskTree & tree, const std::optional<TaskPath> & subtree)
{
  const TaskPath start = subtree.value_or(TaskPath{});
  const TaskTree * t = &tree;
  return Stream<const TaskNode *>(
    [t, start] {
      std::vector<const TaskNode *> stack;
      if (const TaskNode * root = t->node_at(start)) {
        stack.push_back(root);
      }
      return Stream<const TaskNode *>::Generator(
        [t, stack]() mutable -> std::optional<const TaskNode *> {
          if (stack.empty()) {
            return std::nullopt;
          }
          const TaskNode * n = stack.back();
          stack.pop_back();
          for (auto it = n->children.rbegin(); it != n->children.rend(); ++it) {
            stack.push_back(t->node_at(*it));
          }
          return n;
        });
    });
}

std::optional<FieldValue> task_field(const TaskNode & node, TaskField field)
{
  switch (field) {
    case TaskField::outcome:
      if (node.outcome) {
        return FieldValue{*node.outcome};
      }
      return std::nullopt;
    case TaskField::failure:
      if (const auto * f = task_failure(node)) {
        return FieldValue{*f};
      }
      return std::nullopt;
    case TaskField::created_at:
      if (node.created_at) {
        return FieldValue{*node.created_at};
      }
      return std::nullopt;
    case TaskField::started_at:
      if (node.started_at) {
        return FieldValue{*node.started_at};
      }
      return std::nullopt;
    case TaskField::ended_at:
      if (node.ended_at) {
        return FieldValue{*node.ended_at};
      }
      return std::nullopt;
    case TaskField::path:
      return FieldValue{node.path};
  }
  return std::nullopt;
}

const tasktree::Outcome * task_outcome(const TaskNode & node)
{
  return node.outcome ? &*node.outcome : nullptr;
}

const tasktree::Failure * task_failure(const TaskNode & node)
{
  return node.status == TaskStatus::failed && node.failure ? &*node.failure : nullptr;
}

std::optional<tasktree::LogicalTime> task_created_at(const TaskNode & node) {return node.created_at;}
std::optional<tasktree::LogicalTime> task_started_at(const TaskNode & node) {return node.started_at;}
std::optional<tasktree::LogicalTime> task_ended_at(const TaskNode & node) {return node.ended_at;}
const TaskPath & task_path(const TaskNode & node) {return node.path;}

bool is_action_task(const TaskNode & node)
{
  return !node.parameters.empty() &&
         node.parameters.front().kind() == designator::Kind::action;
}

const Description * action_of(const TaskNode & node)
{
  if (!is_action_task(node)) {
    return nullptr;
  }
  if (node.status == TaskStatus::succeeded && node.outcome) {
    if (const auto * d = std::get_if<Description>(&*node.outcome)) {
      return d;
    }
  }
  return &node.parameters.front();
}

namespace
{

bool action_matches(const TaskNode & node, const std::optional<std::string> & action_type)
{
  if (!is_action_task(node)) {
    return false;
  }
  return !action_type || node.parameters.front().type() == *action_type;
}

}  // namespace

Stream<ActionBinding> action_subtasks(
  const TaskTree & tree, const TaskPath & subtree, const std::optional<std::string> & action_type)
{
  const auto nodes = tasks(tree, subtree).filter(
    [action_type](const TaskNode * const & n) {return action_matches(*n, action_type);});
  return nodes.flat_map<ActionBinding>(
    [](const TaskNode * const & n) {
      return Stream<ActionBinding>::from_vector({ActionBinding{n, *action_of(*n)}});
    });
}

const TaskNode * sibling_action(
  const TaskTree & tree, const TaskPath & subtree, const TaskNode & node,
  const std::string & action_type, Direction direction)
{
  const TaskNode * found = nullptr;
  bool passed = false;
  auto gen = tasks(tree, subtree).begin();
  while (auto n = gen()) {
    if (*n == &node) {
      if (direction == Direction::previous) {
        return found;
      }
      passed = true;
      continue;
    }
    if (!is_action_task(**n) || (*n)->parameters.front().type() != action_type) {
      continue;
    }
    if (direction == Direction::previous) {
      found = *n;
    } else if (passed) {
      return *n;
    }
  }
  return nullptr;
}

namespace
{

bool succeeded(const TaskNode & node)
{
  return node.status == TaskStatus::succeeded;
}

struct Half
{
  Description nav;
  Description action;
};

// Pairs each succeeded `action_type` task in the subtree with the navigating
// action that last preceded it.
Stream<Half> action_with_preceding_nav(
  const TaskTree & tree, const TaskPath & subtree, const std::string & action_type)
{
  const TaskTree * t = &tree;
  return action_subtasks(tree, subtree, action_type)
         .filter([](const ActionBinding & b) {return succeeded(*b.node);})
         .flat_map<Half>(
    [t, subtree](const ActionBinding & b) {
      const TaskNode * nav = sibling_action(*t, subtree, *b.node, "navigating", Direction::previous);
      if (!nav) {
        return Stream<Half>::empty();
      }
      return Stream<Half>::from_vector({Half{*action_of(*nav), b.action}});
    });
}

}  // namespace

Stream<FetchDeliverParams> fetch_and_deliver_solutions(const TaskTree & tree, const TaskPath & parent)
{
  const TaskTree * t = &tree;
  const auto fetch_halves = action_subtasks(tree, parent, std::string("fetching"))
    .flat_map<Half>(
    [t](const ActionBinding & fetch) {
      return action_with_preceding_nav(*t, fetch.node->path, "picking-up");
    });
  return fetch_halves.flat_map<FetchDeliverParams>(
    [t, parent](const Half & pick) {
      return action_subtasks(*t, parent, std::string("delivering"))
             .filter([](const ActionBinding & b) {return succeeded(*b.node);})
             .flat_map<FetchDeliverParams>(
        [t, pick](const ActionBinding & deliver) {
          return action_with_preceding_nav(*t, deliver.node->path, "placing")
                 .flat_map<FetchDeliverParams>(
            [pick](const Half & place) {
              return Stream<FetchDeliverParams>::from_vector(
                {FetchDeliverParams{pick.nav, pick.action, place.nav, place.action}});
            });
        });
    });
}

std::optional<FetchDeliverParams> successful_fetch_and_deliver_params(
  const TaskTree & tree, const TaskPath & parent)
{
  return fetch_and_deliver_solutions(tree, parent).first();
}

}  // namespace fetchproj::introspect
