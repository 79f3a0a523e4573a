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

// reflex: run benchmark suites, replay single scenes, and emit scene specs.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "reflex/suite.hpp"

namespace {

using reflex::InputError;

constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitFaults = 3;

struct Overrides {
  std::optional<std::string> config;
  std::optional<std::string> robot;
  std::vector<std::string> families;
  std::optional<int> episodes;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> policies;
  bool dcp_on = false;
  bool dcp_off = false;
  bool ablation = false;
  std::vector<std::string> rmp_sets;
  std::vector<std::string> repulsive_sets;
  std::optional<double> tick_rate;
  std::optional<int> horizon;
  std::optional<double> noise;
  std::optional<double> tau_dyn;
  std::optional<int> jobs;
  bool log_trajectory = false;
  bool no_stop_on_collision = false;
};

void add_shared_options(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--config", o.config, "JSON run configuration (overrides built-in defaults)");
  cmd.add_option("--robot", o.robot, "robot model JSON (default: shipped Panda model)");
  cmd.add_option("--set", o.rmp_sets, "override a goal-proposer gain, NAME=VALUE (repeatable)");
  cmd.add_option("--repulsive-set", o.repulsive_sets,
                 "override a repulsive-policy gain, NAME=VALUE (repeatable)");
  cmd.add_option("--tick-rate", o.tick_rate, "simulation tick rate in Hz")->check(CLI::PositiveNumber);
  cmd.add_option("--horizon", o.horizon, "episode horizon in ticks")->check(CLI::PositiveNumber);
  cmd.add_option("--noise", o.noise, "scene-cloud Gaussian jitter sigma in meters")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--tau-dyn", o.tau_dyn, "dynamic-point distance threshold in meters")
      ->check(CLI::PositiveNumber);
  cmd.add_flag("--log-trajectory", o.log_trajectory, "include per-tick joint logs in reports");
  cmd.add_flag("--no-stop-on-collision", o.no_stop_on_collision,
               "keep simulating after the first collision");
}

void apply_sets(reflex::RmpParams& params, const std::vector<std::string>& sets) {
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InputError("expected NAME=VALUE, got '" + s + "'");
    double value = 0.0;
    try {
      value = std::stod(s.substr(eq + 1));
    } catch (const std::exception&) {
      throw InputError("bad numeric value in '" + s + "'");
    }
    params.set(s.substr(0, eq), value);
  }
  params.validate();
}

reflex::RunConfig build_config(const Overrides& o) {
  reflex::RunConfig config;
  if (const char* env = std::getenv("REFLEX_SEED")) {
    try {
      config.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw InputError(std::string("REFLEX_SEED is not an integer: ") + env);
    }
  }
  if (o.config) config = reflex::load_run_config(*o.config, config);
  if (o.robot) config.robot_model = *o.robot;
  if (!o.families.empty()) {
    nlohmann::json names = o.families;
    config.apply_json({{"family", names}});
  }
  if (o.episodes) config.episodes = *o.episodes;
  if (o.seed) config.seed = *o.seed;
  if (!o.policies.empty()) {
    config.policies.clear();
    for (const auto& p : o.policies) {
      if (p == "all") {
        config.policies = reflex::policy_names();
        break;
      }
      config.policies.push_back(p);
    }
  }
  if (o.ablation) {
    config.dcp_modes = {false, true};
  } else if (o.dcp_on) {
    config.dcp_modes = {true};
  } else if (o.dcp_off) {
    config.dcp_modes = {false};
  }
  apply_sets(config.episode.rmp, o.rmp_sets);
  apply_sets(config.episode.repulsive.params, o.repulsive_sets);
  if (o.tick_rate) config.episode.tick_rate = *o.tick_rate;
  if (o.horizon) config.episode.horizon = *o.horizon;
  if (o.noise) config.episode.noise_sigma = *o.noise;
  if (o.tau_dyn) config.episode.tau_dyn = *o.tau_dyn;
  if (o.jobs) config.jobs = *o.jobs;
  if (o.log_trajectory) config.episode.log_trajectory = true;
  if (o.no_stop_on_collision) config.episode.stop_on_collision = false;
  config.validate();
  return config;
}

int cmd_run(const Overrides& o, const std::string& jsonl, const std::string& csv, bool strict) {
  reflex::RunConfig config = build_config(o);
  const reflex::RobotModel model = reflex::RobotModel::load(config.robot_model);
  const auto reports = reflex::run_suite(config, model);
  const auto rows = reflex::summarize(reports);
  try {
    if (!jsonl.empty()) reflex::write_file_atomic(jsonl, reflex::reports_jsonl(reports));
    if (!csv.empty()) reflex::write_file_atomic(csv, reflex::summary_csv(rows));
  } catch (const std::system_error& e) {
    std::cerr << "reflex: " << e.what() << "\n";
    return kExitIo;
  }
  std::cout << reflex::summary_table(rows);
  std::size_t faults = 0;
  for (const auto& r : reports) faults += r.faulted;
  if (faults > 0) std::cerr << "reflex: " << faults << " faulted episode(s)\n";
  return strict && faults > 0 ? kExitFaults : 0;
}

int cmd_replay(const Overrides& o, const std::string& scene_path, const std::string& trace_path) {
  reflex::RunConfig config = build_config(o);
  const reflex::RobotModel model = reflex::RobotModel::load(config.robot_model);
  std::ifstream in(scene_path);
  if (!in) throw InputError("cannot open scene " + scene_path);
  reflex::SceneSpec spec;
  try {
    spec = reflex::SceneSpec::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("scene " + scene_path + ": " + e.what());
  }
  if (config.policies.size() != 1 || config.dcp_modes.size() != 1) {
    throw InputError("replay takes exactly one policy and one dcp mode");
  }
  std::string out;
  const auto observer = [&](const reflex::TickRecord& r) {
    out += r.to_json().dump();
    out += '\n';
  };
  const auto report = reflex::run_episode(spec, model, config.policies.front(),
                                          config.dcp_modes.front(), config.episode, observer);
  out += nlohmann::json{{"report", report.to_json()}}.dump();
  out += '\n';
  if (trace_path.empty() || trace_path == "-") {
    std::cout << out;
  } else {
    try {
      reflex::write_file_atomic(trace_path, out);
    } catch (const std::system_error& e) {
      std::cerr << "reflex: " << e.what() << "\n";
      return kExitIo;
    }
  }
  return 0;
}

int cmd_gen(const Overrides& o, const std::string& out_path) {
  reflex::RunConfig config = build_config(o);
  if (config.families.size() != 1) throw InputError("gen takes exactly one family");
  const reflex::RobotModel model = reflex::RobotModel::load(config.robot_model);
  const auto spec =
      reflex::generate_scenario(config.families.front(), config.seed, config.difficulty, model);
  const std::string text = spec.to_json().dump(2) + "\n";
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return 0;
  }
  try {
    reflex::write_file_atomic(out_path, text);
  } catch (const std::system_error& e) {
    std::cerr << "reflex: " << e.what() << "\n";
    return kExitIo;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reflex: reactive goal proposal for a 7-DoF arm, with a simulated benchmark"};
  app.require_subcommand(1);

  Overrides run_o, replay_o, gen_o;
  std::string jsonl, csv, scene_path, trace_path, gen_out;
  bool strict = false;

  auto* run = app.add_subcommand("run", "run a benchmark suite and write reports");
  add_shared_options(*run, run_o);
  run->add_option("--family", run_o.families, "se | sao | fdo | gb | dgb | all (repeatable)");
  run->add_option("--episodes", run_o.episodes, "episodes per family")->check(CLI::PositiveNumber);
  run->add_option("--seed", run_o.seed, "base seed (env REFLEX_SEED is the fallback)");
  run->add_option("--policy", run_o.policies, "interpolator | repulsive | all (repeatable)");
  auto* on = run->add_flag("--dcp-rmp", run_o.dcp_on, "enable the goal proposer");
  auto* off = run->add_flag("--no-dcp-rmp", run_o.dcp_off, "disable the goal proposer");
  auto* both = run->add_flag("--ablation", run_o.ablation, "run with and without the goal proposer");
  on->excludes(off)->excludes(both);
  off->excludes(both);
  run->add_option("--jobs", run_o.jobs, "worker threads")->check(CLI::PositiveNumber);
  run->add_option("--out-jsonl", jsonl, "episode reports, one JSON object per line");
  run->add_option("--out-csv", csv, "suite summary CSV");
  run->add_flag("--strict", strict, "exit nonzero if any episode faulted");

  auto* replay = app.add_subcommand("replay", "re-run one scene with per-tick trace records");
  add_shared_options(*replay, replay_o);
  replay->add_option("scene", scene_path, "scene JSON written by `reflex gen`")->required();
  replay->add_option("--policy", replay_o.policies, "interpolator | repulsive");
  auto* ron = replay->add_flag("--dcp-rmp", replay_o.dcp_on, "enable the goal proposer");
  auto* roff = replay->add_flag("--no-dcp-rmp", replay_o.dcp_off, "disable the goal proposer");
  ron->excludes(roff);
  replay->add_option("--trace", trace_path, "write the trace here instead of stdout");

  auto* gen = app.add_subcommand("gen", "emit a generated scene spec as JSON");
  add_shared_options(*gen, gen_o);
  gen->add_option("--family", gen_o.families, "se | sao | fdo | gb | dgb")->required();
  gen->add_option("--seed", gen_o.seed, "scene seed (env REFLEX_SEED is the fallback)");
  gen->add_option("--out", gen_out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_o, jsonl, csv, strict);
    if (*replay) return cmd_replay(replay_o, scene_path, trace_path);
    return cmd_gen(gen_o, gen_out);
  } catch (const InputError& e) {
    std::cerr << "reflex: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "reflex: " << e.what() << "\n";
    return kExitIo;
  }
}
