// Copyright 2026 The Reflex Authors
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


// End-to-end checks of the `reflex` executable through the shell.

#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const fs::path kCli = REFLEX_CLI_PATH;

fs::path scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "reflex_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Result {
  int code = -1;
  std::string out;
};

// Runs the CLI with `args`, capturing stdout; stderr goes to a file.
Result cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + kCli.string() + " " + args + " 2>" +
                          (scratch() / "stderr.txt").string();
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::string path_arg(const fs::path& p) { return "'" + p.string() + "'"; }

TEST_CASE("repeated runs write byte-identical JSONL") {
  const fs::path a = scratch() / "a.jsonl", b = scratch() / "b.jsonl", c = scratch() / "c.jsonl";
  const std::string common = "run --family fdo --episodes 6 --seed 7 --policy interpolator --dcp-rmp --horizon 300";
  REQUIRE(cli(common + " --out-jsonl " + path_arg(a)).code == 0);
  REQUIRE(cli(common + " --out-jsonl " + path_arg(b)).code == 0);
  REQUIRE(cli(common + " --jobs 3 --out-jsonl " + path_arg(c)).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) == slurp(c));
  CHECK(lines_of(slurp(a)).size() == 6);
}

TEST_CASE("REFLEX_SEED is the fallback base seed") {
  const fs::path a = scratch() / "env.jsonl", b = scratch() / "flag.jsonl";
  REQUIRE(cli("run --family se --episodes 2 --horizon 200 --out-jsonl " + path_arg(a), "REFLEX_SEED=31").code == 0);
  REQUIRE(cli("run --family se --episodes 2 --horizon 200 --seed 31 --out-jsonl " + path_arg(b)).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(json::parse(lines_of(slurp(a)).front())["seed"] == 31);
}

TEST_CASE("--family all writes five family sections") {
  const fs::path csv = scratch() / "all.csv";
  const Result r = cli("run --family all --episodes 1 --seed 3 --horizon 150 --out-csv " + path_arg(csv));
  REQUIRE(r.code == 0);
  const auto rows = lines_of(slurp(csv));
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == "family,policy,dcp_rmp,episodes,reach_rate,collision_rate,success_rate,mean_min_clearance,faults");
  std::set<std::string> families;
  for (std::size_t i = 1; i < rows.size(); ++i) families.insert(rows[i].substr(0, rows[i].find(',')));
  CHECK(families == std::set<std::string>{"se", "sao", "fdo", "gb", "dgb"});
  CHECK(r.out.find("dgb") != std::string::npos);  // summary table on stdout
}

TEST_CASE("ablation rows differ only in the mode column and the metrics") {
  const fs::path csv = scratch() / "ablation.csv";
  REQUIRE(cli("run --family dgb --episodes 4 --seed 0 --policy all --ablation --out-csv " + path_arg(csv)).code == 0);
  const auto rows = lines_of(slurp(csv));
  REQUIRE(rows.size() == 5);
  const auto fields = [](const std::string& row) {
    std::vector<std::string> f;
    std::istringstream in(row);
    for (std::string cell; std::getline(in, cell, ',');) f.push_back(cell);
    return f;
  };
  for (std::size_t i = 1; i < rows.size(); i += 2) {
    const auto on = fields(rows[i]), off = fields(rows[i + 1]);
    REQUIRE(on.size() == 9);
    CHECK(on[0] == off[0]);
    CHECK(on[1] == off[1]);
    CHECK(on[2] != off[2]);
    CHECK(on[3] == off[3]);
  }
}

TEST_CASE("replay reproduces the recorded report and traces every tick") {
  const fs::path scene = scratch() / "dgb.json", jsonl = scratch() / "dgb.jsonl";
  REQUIRE(cli("gen --family dgb --seed 2 --out " + path_arg(scene)).code == 0);
  const std::string before = slurp(scene);
  REQUIRE(cli("run --family dgb --episodes 1 --seed 2 --policy interpolator --ablation --out-jsonl " + path_arg(jsonl)).code == 0);
  json recorded_on, recorded_off;
  for (const auto& line : lines_of(slurp(jsonl))) {
    const json j = json::parse(line);
    (j["dcp_rmp"].get<bool>() ? recorded_on : recorded_off) = j;
  }
  REQUIRE(recorded_on.is_object());
  REQUIRE(recorded_off.is_object());

  const Result on = cli("replay --policy interpolator --dcp-rmp " + path_arg(scene));
  REQUIRE(on.code == 0);
  const auto trace = lines_of(on.out);
  REQUIRE(trace.size() > 2);
  const json last = json::parse(trace.back());
  CHECK(last.at("report") == recorded_on);
  // One record per executed tick plus the terminal observation.
  CHECK(static_cast<int>(trace.size()) - 1 == last["report"]["ticks"].get<int>() + 1);
  for (std::size_t i = 0; i + 1 < trace.size(); ++i) CHECK(json::parse(trace[i])["tick"] == i);

  const Result off = cli("replay --policy interpolator --no-dcp-rmp " + path_arg(scene));
  REQUIRE(off.code == 0);
  CHECK(json::parse(lines_of(off.out).back()).at("report") == recorded_off);
  CHECK(slurp(scene) == before);  // inputs are never rewritten
}

TEST_CASE("a DGB replay without the proposer collides where the paired run did not") {
  int found = 0;
  for (int seed = 0; seed < 10 && found == 0; ++seed) {
    const fs::path scene = scratch() / ("dgb" + std::to_string(seed) + ".json");
    REQUIRE(cli("gen --family dgb --seed " + std::to_string(seed) + " --out " + path_arg(scene)).code == 0);
    const json on = json::parse(lines_of(cli("replay --dcp-rmp " + path_arg(scene)).out).back())["report"];
    if (on["collided"].get<bool>()) continue;
    const json off = json::parse(lines_of(cli("replay --no-dcp-rmp " + path_arg(scene)).out).back())["report"];
    CAPTURE(seed);
    CHECK(off["collided"].get<bool>());
    ++found;
  }
  CHECK(found == 1);
}

TEST_CASE("an empty scene replays with no repulsor on any tick") {
  const fs::path src = scratch() / "se.json", empty = scratch() / "empty.json";
  REQUIRE(cli("gen --family se --seed 4 --out " + path_arg(src)).code == 0);
  json scene = json::parse(slurp(src));
  scene["static_obstacles"] = json::array();
  scene["dynamic_obstacles"] = json::array();
  std::ofstream(empty) << scene.dump(2);
  const fs::path trace = scratch() / "trace.jsonl";
  REQUIRE(cli("replay --dcp-rmp --trace " + path_arg(trace) + " " + path_arg(empty)).code == 0);
  const auto lines = lines_of(slurp(trace));
  REQUIRE(lines.size() > 1);
  for (std::size_t i = 0; i + 1 < lines.size(); ++i) CHECK(json::parse(lines[i])["proposal"]["x_r"].is_null());
  CHECK(json::parse(lines.back())["report"]["success"].get<bool>());
}

TEST_CASE("gen is deterministic") {
  const Result a = cli("gen --family sao --seed 5");
  const Result b = cli("gen --family sao --seed 5");
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(json::parse(a.out)["family"] == "sao");
}

TEST_CASE("exit codes") {
  CHECK(cli("run --help").code == 0);
  CHECK(cli("run --family nope").code == 2);
  CHECK(cli("run --policy learned").code == 2);
  CHECK(cli("run --frobnicate").code == 2);
  CHECK(cli("run --dcp-rmp --no-dcp-rmp").code == 2);
  CHECK(cli("run --set k_x=1").code == 2);
  CHECK(cli("run --set ell_m=-1").code == 2);
  CHECK(cli("frob").code == 2);
  CHECK(cli("run --episodes 1 --horizon 50 --out-jsonl /nonexistent-dir/x.jsonl").code == 1);

  const fs::path bad = scratch() / "bad.json";
  std::ofstream(bad) << "{ not json";
  CHECK(cli("replay " + path_arg(bad)).code == 2);
  CHECK(cli("replay " + path_arg(scratch() / "missing.json")).code == 2);
  CHECK(cli("run --config " + path_arg(bad)).code == 2);
}

TEST_CASE("help documents every run flag") {
  const Result r = cli("run --help");
  for (const char* flag : {"--config", "--robot", "--set", "--repulsive-set", "--tick-rate", "--horizon", "--noise",
                           "--tau-dyn", "--log-trajectory", "--no-stop-on-collision", "--family", "--episodes",
                           "--seed", "--policy", "--dcp-rmp", "--no-dcp-rmp", "--ablation", "--jobs",
                           "--out-jsonl", "--out-csv", "--strict"}) {
    CAPTURE(flag);
    CHECK(r.out.find(flag) != std::string::npos);
  }
}

}  // namespace
