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

// Command line front end: run scenarios, query and replay traces.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "CLI11.hpp"
#include "fetchproj/introspect.hpp"
#include "fetchproj/scenario.hpp"
#include "fetchproj/task_tree.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fetchproj;

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitBadInput = 2;

class InputError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path & file)
{
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw InputError("cannot read " + file.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path & file, const std::string & bytes)
{
  std::ofstream out(file, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + file.string());
  }
  out << bytes;
}

tasktree::TaskTree load_trace(const fs::path & file)
{
  try {
    return tasktree::deserialize_tree(read_file(file));
  } catch (const tasktree::MalformedTrace & e) {
    throw InputError(file.string() + ": " + e.what());
  }
}

struct RunOptions
{
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string projection;
  int runs{1};
  std::optional<int> samples;
  std::string out;
  std::string format{"table"};
};

int run_command(const RunOptions & o)
{
  scenario::ScenarioConfig config = scenario::load_config(o.scenario);
  if (!o.projection.empty()) {
    config.projection.enabled = o.projection == "on";
  }
  if (o.samples) {
    config.projection.n_runs = *o.samples;
  }
  const std::uint64_t seed = o.seed.value_or(config.seed);

  std::vector<scenario::RunResult> results;
  std::vector<scenario::RunMetrics> metrics;
  for (int i = 0; i < o.runs; ++i) {
    results.push_back(scenario::run_scenario(config, seed + static_cast<std::uint64_t>(i)));
    metrics.push_back(results.back().metrics);
  }

  std::string table;
  if (o.runs == 1) {
    table = scenario::format_table(metrics.front());
  } else {
    table = scenario::format_table(scenario::aggregate(metrics));
  }
  const std::string records =
    scenario::format_records(metrics) + scenario::format_aggregate_record(scenario::aggregate(metrics));

  if (!o.out.empty()) {
    const fs::path out(o.out);
    fs::create_directories(out);
    for (std::size_t i = 0; i < results.size(); ++i) {
      const fs::path dir = out / ("run-" + std::to_string(i));
      fs::create_directories(dir);
      const json meta{
        {"seed", results[i].metrics.seed}, {"projection", results[i].metrics.projection},
        {"objects", config.object_order}};
      write_file(dir / "run.json", meta.dump(1) + "\n");
      for (std::size_t k = 0; k < results[i].traces.size(); ++k) {
        write_file(dir / scenario::trace_file_name(k, results[i].traces[k].object), results[i].traces[k].bytes);
      }
    }
    write_file(out / "metrics.jsonl", scenario::format_records(metrics));
    write_file(out / "timing.jsonl", scenario::format_timing(results));
    write_file(out / "table.txt", table);
  }

  std::cout << (o.format == "records" ? records : table);
  for (const auto & r : results) {
    for (const auto & t : r.timing) {
      if (!t.belief_restored) {
        std::cerr << "warning: belief not restored after projecting " << t.object << "\n";
        return kExitFailure;
      }
    }
  }
  return kExitOk;
}

int query_command(const std::string & trace)
{
  const tasktree::TaskTree tree = load_trace(trace);
  const auto found = introspect::successful_fetch_and_deliver_params(tree);
  if (!found) {
    std::cout << "no solution\n";
    return kExitOk;
  }
  const json out{
    {"pick_nav", tasktree::to_json(found->pick_nav)},
    {"pick", tasktree::to_json(found->pick)},
    {"place_nav", tasktree::to_json(found->place_nav)},
    {"place", tasktree::to_json(found->place)}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

// A run directory holds run.json and one trace per object.
scenario::RunMetrics replay_run(const fs::path & dir)
{
  json meta;
  try {
    meta = json::parse(read_file(dir / "run.json"));
  } catch (const json::exception & e) {
    throw InputError((dir / "run.json").string() + ": " + e.what());
  }
  scenario::RunMetrics run;
  run.seed = meta.value("seed", std::uint64_t{0});
  run.projection = meta.value("projection", false);
  const auto objects = meta.value("objects", std::vector<std::string>{});
  for (std::size_t k = 0; k < objects.size(); ++k) {
    run.objects.push_back(
      scenario::metrics_from_tree(load_trace(dir / scenario::trace_file_name(k, objects[k]))));
  }
  return run;
}

int replay_command(const std::string & trace, const std::string & format)
{
  const fs::path path(trace);
  if (fs::is_regular_file(path)) {
    scenario::RunMetrics run;
    run.objects.push_back(scenario::metrics_from_tree(load_trace(path)));
    std::cout << (format == "records" ? scenario::format_records({run}) : scenario::format_table(run));
    return kExitOk;
  }
  if (!fs::is_directory(path)) {
    throw InputError("no such trace file or directory: " + trace);
  }
  std::vector<scenario::RunMetrics> runs;
  if (fs::exists(path / "run.json")) {
    runs.push_back(replay_run(path));
  } else {
    for (int i = 0; fs::exists(path / ("run-" + std::to_string(i))); ++i) {
      runs.push_back(replay_run(path / ("run-" + std::to_string(i))));
    }
  }
  if (runs.empty()) {
    throw InputError(trace + " contains no recorded runs");
  }
  if (format == "records") {
    std::cout << scenario::format_records(runs);
  } else {
    std::cout << (runs.size() == 1 ?
      scenario::format_table(runs.front()) : scenario::format_table(scenario::aggregate(runs)));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Fetch-and-deliver plans with projection-based parameter selection"};
  app.require_subcommand(1);

  RunOptions run;
  auto * run_cmd = app.add_subcommand("run", "Run the transport scenario");
  run_cmd->add_option("--scenario", run.scenario, "Scenario configuration (JSON)")->required();
  run_cmd->add_option("--seed", run.seed, "Seed of the first run (default: config seed)");
  run_cmd->add_option("--projection", run.projection, "Override projection")
  ->check(CLI::IsMember({"on", "off"}));
  run_cmd->add_option("--runs", run.runs, "Number of runs (seeds seed, seed+1, ...)")
  ->check(CLI::Range(1, 100000));
  run_cmd->add_option("--projection-samples", run.samples, "Projection runs per object")
  ->check(CLI::Range(1, 1000));
  run_cmd->add_option("--out", run.out, "Output directory for traces and metrics");
  run_cmd->add_option("--format", run.format, "Output format")
  ->check(CLI::IsMember({"table", "records"}));

  std::string query_trace;
  auto * query_cmd = app.add_subcommand("query", "Extract fetch-and-deliver parameters from a trace");
  query_cmd->add_option("--trace", query_trace, "Trace file")->required();

  std::string replay_trace;
  std::string replay_format = "table";
  auto * replay_cmd = app.add_subcommand("replay", "Recompute metrics from traces");
  replay_cmd->add_option("--trace", replay_trace, "Trace file, run directory or output directory")
  ->required();
  replay_cmd->add_option("--format", replay_format, "Output format")
  ->check(CLI::IsMember({"table", "records"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    app.exit(e);
    return kExitBadInput;
  }

  try {
    if (*run_cmd) {
      return run_command(run);
    }
    if (*query_cmd) {
      return query_command(query_trace);
    }
    return replay_command(replay_trace, replay_format);
  } catch (const scenario::ConfigError & e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const InputError & e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitBadInput;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
