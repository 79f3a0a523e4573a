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

#include "reflex/suite.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <system_error>
#include <thread>

namespace reflex {

namespace {

using nlohmann::json;

std::vector<std::string> string_list(const json& j) {
  if (j.is_string()) return {j.get<std::string>()};
  return j.get<std::vector<std::string>>();
}

}  // namespace

void RunConfig::apply_json(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) throw InputError("config: expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "robot_model") {
      std::filesystem::path p = value.get<std::string>();
      robot_model = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    } else if (key == "family") {
      families.clear();
      for (const auto& name : string_list(value)) {
        if (name == "all") {
          families.assign(std::begin(kAllFamilies), std::end(kAllFamilies));
        } else {
          families.push_back(parse_family(name));
        }
      }
    } else if (key == "episodes") {
      episodes = value.get<int>();
    } else if (key == "seed") {
      seed = value.get<std::uint64_t>();
    } else if (key == "policy") {
      policies = string_list(value);
    } else if (key == "dcp_rmp") {
      dcp_modes = value.is_array() ? value.get<std::vector<bool>>() : std::vector<bool>{value.get<bool>()};
    } else if (key == "jobs") {
      jobs = value.get<int>();
    } else if (key == "tick_rate") {
      episode.tick_rate = value.get<double>();
    } else if (key == "horizon") {
      episode.horizon = value.get<int>();
    } else if (key == "scene_points") {
      episode.scene_points = value.get<std::size_t>();
    } else if (key == "robot_points") {
      episode.robot_points = value.get<std::size_t>();
    } else if (key == "chunk_length") {
      episode.chunk_length = value.get<std::size_t>();
    } else if (key == "speed_fraction") {
      episode.speed_fraction = value.get<double>();
    } else if (key == "noise_sigma") {
      episode.noise_sigma = value.get<double>();
    } else if (key == "tau_dyn") {
      episode.tau_dyn = value.get<double>();
    } else if (key == "stop_on_collision") {
      episode.stop_on_collision = value.get<bool>();
    } else if (key == "log_trajectory") {
      episode.log_trajectory = value.get<bool>();
    } else if (key == "rmp") {
      episode.rmp = RmpParams::from_json(value, episode.rmp);
    } else if (key == "repulsive") {
      for (const auto& [rk, rv] : value.items()) {
        if (rk == "params") {
          episode.repulsive.params = RmpParams::from_json(rv, episode.repulsive.params);
        } else if (rk == "k_nearest") {
          episode.repulsive.k_nearest = rv.get<std::size_t>();
        } else {
          throw InputError("config: unknown repulsive field '" + rk + "'");
        }
      }
    } else if (key == "difficulty") {
      json merged = difficulty.to_json();
      merged.update(value);
      difficulty = DifficultyConfig::from_json(merged);
    } else {
      throw InputError("config: unknown field '" + key + "'");
    }
  }
}

void RunConfig::validate() const {
  if (episodes < 1) throw InputError("config: episodes must be >= 1");
  if (jobs < 1) throw InputError("config: jobs must be >= 1");
  if (families.empty() || policies.empty() || dcp_modes.empty()) {
    throw InputError("config: empty family, policy or dcp selection");
  }
  for (const auto& p : policies) {
    if (std::find(policy_names().begin(), policy_names().end(), p) == policy_names().end()) {
      throw InputError("unknown policy '" + p + "'");
    }
  }
  episode.validate();
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
    base.apply_json(doc, path.parent_path());
  } catch (const json::exception& e) {
    throw InputError("config " + path.string() + ": " + e.what());
  }
  return base;
}

std::vector<EpisodeReport> run_suite(const RunConfig& config, const RobotModel& model) {
  config.validate();
  struct Job {
    std::size_t scene;
    std::string policy;
    bool dcp;
  };
  std::vector<SceneSpec> scenes;
  std::vector<Job> jobs;
  for (Family family : config.families) {
    const std::size_t first = scenes.size();
    for (int i = 0; i < config.episodes; ++i) scenes.emplace_back().family = family;
    for (const auto& policy : config.policies) {
      for (bool dcp : config.dcp_modes) {
        for (int i = 0; i < config.episodes; ++i) jobs.push_back({first + i, policy, dcp});
      }
    }
  }

  const auto workers = static_cast<std::size_t>(config.jobs);
  const auto parallel_for = [&](std::size_t count, const auto& body) {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    const auto work = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    };
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < std::min(workers, count); ++w) pool.emplace_back(work);
    work();
    pool.clear();
    if (error) std::rethrow_exception(error);
  };

  parallel_for(scenes.size(), [&](std::size_t i) {
    const Family family = scenes[i].family;
    const std::uint64_t seed =
        config.seed + static_cast<std::uint64_t>(i % static_cast<std::size_t>(config.episodes));
    scenes[i] = generate_scenario(family, seed, config.difficulty, model);
  });

  std::vector<EpisodeReport> reports(jobs.size());
  parallel_for(jobs.size(), [&](std::size_t i) {
    reports[i] = run_episode(scenes[jobs[i].scene], model, jobs[i].policy, jobs[i].dcp, config.episode);
  });
  return reports;
}

std::string reports_jsonl(const std::vector<EpisodeReport>& reports) {
  std::string out;
  for (const auto& r : reports) {
    out += r.to_json().dump();
    out += '\n';
  }
  return out;
}

std::vector<SummaryRow> summarize(const std::vector<EpisodeReport>& reports) {
  std::vector<SummaryRow> rows;
  std::vector<std::vector<EpisodeReport>> groups;
  for (const auto& r : reports) {
    auto it = std::find_if(rows.begin(), rows.end(), [&](const SummaryRow& row) {
      return row.family == r.family && row.policy == r.policy && row.dcp_rmp == r.dcp_rmp;
    });
    if (it == rows.end()) {
      rows.push_back({r.family, r.policy, r.dcp_rmp, {}});
      groups.emplace_back();
      it = rows.end() - 1;
    }
    groups[static_cast<std::size_t>(it - rows.begin())].push_back(r);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i].summary = aggregate(groups[i]);
  return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = std::string(kSummaryCsvHeader) + "\n";
  for (const auto& row : rows) {
    out += summary_csv_row(family_name(row.family), row.policy, row.dcp_rmp, row.summary);
    out += '\n';
  }
  return out;
}

std::string summary_table(const std::vector<SummaryRow>& rows) {
  std::vector<Family> families;
  std::vector<std::string> methods;
  std::map<std::pair<std::string, Family>, const SummaryRow*> cell;
  for (const auto& row : rows) {
    if (std::find(families.begin(), families.end(), row.family) == families.end()) {
      families.push_back(row.family);
    }
    const std::string method = row.policy + (row.dcp_rmp ? " + dcp-rmp" : "");
    if (std::find(methods.begin(), methods.end(), method) == methods.end()) methods.push_back(method);
    cell[{method, row.family}] = &row;
  }
  std::size_t width = 6;
  for (const auto& m : methods) width = std::max(width, m.size());

  std::ostringstream out;
  char buf[64];
  out << std::string(width, ' ');
  for (Family f : families) {
    std::snprintf(buf, sizeof(buf), "  %20s", std::string(family_name(f)).c_str());
    out << buf;
  }
  out << "\n" << std::string(width, ' ');
  for (std::size_t i = 0; i < families.size(); ++i) out << "      succ   reach    coll";
  out << "\n";
  for (const auto& m : methods) {
    out << m << std::string(width - m.size(), ' ');
    for (Family f : families) {
      const auto it = cell.find({m, f});
      if (it == cell.end()) {
        out << "                 -";
        continue;
      }
      const SuiteSummary& s = it->second->summary;
      std::snprintf(buf, sizeof(buf), "  %7.1f %7.1f %7.1f", s.success_rate, s.reach_rate,
                    s.collision_rate);
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::system_error(errno, std::generic_category(), "cannot write " + tmp.string());
    out << content;
    out.close();
    if (!out) throw std::system_error(errno, std::generic_category(), "cannot write " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::system_error(ec, "cannot rename into " + path.string());
  }
}

}  // namespace reflex
