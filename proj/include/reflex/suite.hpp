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

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reflex/simbench.hpp"

namespace reflex {

/// A suite: every (family, policy, dcp mode) combination over seeds
/// seed .. seed + episodes - 1. Scenes are shared across combinations, so
/// ablations are paired by seed.
struct RunConfig {
  std::vector<Family> families{Family::kSE};
  int episodes = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> policies{"interpolator"};
  std::vector<bool> dcp_modes{true};
  int jobs = 1;
  bool strict = false;
  std::filesystem::path robot_model = REFLEX_DEFAULT_ROBOT;
  std::filesystem::path jsonl_path;
  std::filesystem::path csv_path;
  EpisodeConfig episode;
  DifficultyConfig difficulty;

  /// Merges a configuration document; unknown keys are errors. Relative
  /// robot_model paths resolve against `base_dir`.
  void apply_json(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
  void validate() const;
};

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

/// Runs every episode of the suite on `jobs` worker threads. The result
/// order is fixed (family, policy, dcp mode, seed) regardless of threading.
std::vector<EpisodeReport> run_suite(const RunConfig& config, const RobotModel& model);

std::string reports_jsonl(const std::vector<EpisodeReport>& reports);

struct SummaryRow {
  Family family;
  std::string policy;
  bool dcp_rmp;
  SuiteSummary summary;
};

std::vector<SummaryRow> summarize(const std::vector<EpisodeReport>& reports);
std::string summary_csv(const std::vector<SummaryRow>& rows);

/// Aligned text table: methods as rows, families as success-rate columns.
std::string summary_table(const std::vector<SummaryRow>& rows);

/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace reflex
