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

#ifndef FETCHPROJ__INTROSPECT_HPP_
#define FETCHPROJ__INTROSPECT_HPP_

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "fetchproj/task_tree.hpp"

/// Query predicates over finalized task trees.
///
/// Every predicate returns a lazy Stream of solutions enumerated in
/// depth-first, left-to-right tree order. Streams can be enumerated any
/// number of times and always yield the same solutions.
namespace fetchproj::introspect
{

using tasktree::Description;
using tasktree::TaskNode;
using tasktree::TaskPath;
using tasktree::TaskTree;

template<typename T>
class Stream
{
public:
  /// Produces the next solution, or nullopt once exhausted.
  using Generator = std::function<std::optional<T>()>;
  using Factory = std::function<Generator()>;

  explicit Stream(Factory factory)
  : factory_(std::move(factory)) {}

  static Stream empty()
  {
    return Stream([] {return Generator([]() -> std::optional<T> {return std::nullopt;});});
  }

  static Stream from_vector(std::vector<T> items)
  {
    auto shared = std::make_shared<const std::vector<T>>(std::move(items));
    return Stream(
      [shared] {
        return Generator(
          [shared, i = std::size_t{0}]() mutable -> std::optional<T> {
            if (i >= shared->size()) {
              return std::nullopt;
            }
            return (*shared)[i++];
          });
      });
  }

  Generator begin() const {return factory_();}

  std::optional<T> first() const {return begin()();}

  std::vector<T> to_vector() const
  {
    std::vector<T> out;
    auto gen = begin();
    while (auto v = gen()) {
      out.push_back(std::move(*v));
    }
    return out;
  }

  std::size_t count() const
  {
    std::size_t n = 0;
    auto gen = begin();
    while (gen()) {
      ++n;
    }
    return n;
  }

  /// Keeps the solutions satisfying `pred`.
  Stream filter(std::function<bool(const T &)> pred) const
  {
    Factory inner = factory_;
    return Stream(
      [inner, pred] {
        return Generator(
          [gen = inner(), pred]() mutable -> std::optional<T> {
            while (auto v = gen()) {
              if (pred(*v)) {
                return v;
              }
            }
            return std::nullopt;
          });
      });
  }

  /// For every solution, enumerates the solutions of `next(solution)`.
  template<typename U>
  Stream<U> flat_map(std::function<Stream<U>(const T &)> next) const
  {
    using InnerGen = typename Stream<U>::Generator;
    Factory inner = factory_;
    return Stream<U>(
      [inner, next] {
        return InnerGen(
          [outer = inner(), next, current = std::optional<InnerGen>{}]() mutable
          -> std::optional<U> {
            while (true) {
              if (current) {
                if (auto v = (*current)()) {
                  return v;
                }
                current.reset();
              }
              auto o = outer();
              if (!o) {
                return std::nullopt;
              }
              current = next(*o).begin();
            }
          });
      });
  }

private:
  Factory factory_;
};

/// Every node under `subtree` (whole tree when absent), the subtree root included.
Stream<const TaskNode *> tasks(const TaskTree & tree, const std::optional<TaskPath> & subtree = {});

enum class TaskField { outcome, failure, created_at, started_at, ended_at, path };

using FieldValue = std::variant<tasktree::Outcome, tasktree::Failure, tasktree::LogicalTime, TaskPath>;

std::optional<FieldValue> task_field(const TaskNode & node, TaskField field);

const tasktree::Outcome * task_outcome(const TaskNode & node);
const tasktree::Failure * task_failure(const TaskNode & node);
std::optional<tasktree::LogicalTime> task_created_at(const TaskNode & node);
std::optional<tasktree::LogicalTime> task_started_at(const TaskNode & node);
std::optional<tasktree::LogicalTime> task_ended_at(const TaskNode & node);
const TaskPath & task_path(const TaskNode & node);

/// True when the node's first parameter is an action description.
bool is_action_task(const TaskNode & node);

/// The action bound to an action task: its grounded outcome when the node
/// succeeded, its input description otherwise.
const Description * action_of(const TaskNode & node);

struct ActionBinding
{
  const TaskNode * node;
  Description action;
};

Stream<ActionBinding> action_subtasks(
  const TaskTree & tree, const TaskPath & subtree,
  const std::optional<std::string> & action_type = {});

enum class Direction { previous, next };

/// Nearest action task of `action_type` strictly before or after `node`
/// among the action tasks of the subtree, in document order.
const TaskNode * sibling_action(
  const TaskTree & tree, const TaskPath & subtree, const TaskNode & node,
  const std::string & action_type, Direction direction);

struct FetchDeliverParams
{
  Description pick_nav;
  Description pick;
  Description place_nav;
  Description place;
};

/// All solutions of the fetch-and-deliver rule under `parent`.
///
/// Conjuncts: a fetching action task; a succeeded picking-up action in its
/// subtree and the navigating action preceding it; a succeeded delivering
/// action task; a succeeded placing action in its subtree and the navigating
/// action preceding it. The fetching task's own outcome is not inspected.
Stream<FetchDeliverParams> fetch_and_deliver_solutions(const TaskTree & tree, const TaskPath & parent);

/// First solution of the rule, if any.
std::optional<FetchDeliverParams> successful_fetch_and_deliver_params(
  const TaskTree & tree, const TaskPath & parent = {});

}  // namespace fetchproj::introspect

#endif  // FETCHPROJ__INTROSPECT_HPP_
