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

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace
{

struct Result
{
  int code;
  std::string out;
};

Result cli(const std::string & args)
{
  const std::string cmd = std::string(FETCHPROJ_CLI) + " " + args + " 2>/dev/null";
  FILE * pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    return {-1, ""};
  }
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof(buf), pipe)) {
    out.append(buf, n);
  }
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path scratch(const std::string & name)
{
  const fs::path dir = fs::temp_directory_path() / ("fetchproj-cli-" + name + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string scenario_arg()
{
  return std::string("--scenario ") + FETCHPROJ_SCENARIO_FILE;
}

}  // namespace

TEST(Cli, RunWritesTracesAndTable)
{
  const fs::path out = scratch("run");
  const Result r = cli("run " + scenario_arg() + " --seed 4 --projection off --runs 1 --out " + out.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("Runtime (steps)"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "metrics.jsonl"));
  EXPECT_TRUE(fs::exists(out / "run-0" / "run.json"));

  // Replaying the recorded traces reproduces the printed table.
  const Result replay = cli("replay --trace " + (out / "run-0").string());
  EXPECT_EQ(replay.code, 0);
  EXPECT_EQ(replay.out, r.out);

  fs::path trace;
  for (const auto & e : fs::directory_iterator(out / "run-0")) {
    if (e.path().filename() != "run.json") {
      trace = e.path();
      break;
    }
  }
  ASSERT_FALSE(trace.empty());
  const Result q = cli("query --trace " + trace.string());
  EXPECT_EQ(q.code, 0);
  EXPECT_FALSE(q.out.empty());
  fs::remove_all(out);
}

TEST(Cli, RecordsFormatIsJsonLines)
{
  const Result r = cli("run " + scenario_arg() + " --seed 2 --projection off --runs 2 --format records");
  ASSERT_EQ(r.code, 0);
  std::istringstream lines(r.out);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    EXPECT_NO_THROW(nlohmann::json::parse(line)) << line;
    ++n;
  }
  EXPECT_GT(n, 2);
}

TEST(Cli, ConfigErrorsExitWithTwo)
{
  const fs::path dir = scratch("bad");
  std::ofstream(dir / "bad.json") << R"({"schema_version": 99})";
  EXPECT_EQ(cli("run --scenario " + (dir / "bad.json").string()).code, 2);
  EXPECT_EQ(cli("run --scenario " + (dir / "missing.json").string()).code, 2);
  EXPECT_EQ(cli("run " + scenario_arg() + " --projection maybe").code, 2);
  EXPECT_EQ(cli("run " + scenario_arg() + " --runs 0").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
  std::ofstream(dir / "trace.json") << "not a trace";
  EXPECT_EQ(cli("query --trace " + (dir / "trace.json").string()).code, 2);
  EXPECT_EQ(cli("replay --trace " + (dir / "nothing").string()).code, 2);
  fs::remove_all(dir);
}
