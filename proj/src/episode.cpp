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

#include <cmath>
#include <cstdio>
#include <limits>

#include "reflex/simbench.hpp"

namespace reflex {

namespace {

using nlohmann::json;

constexpr std::uint64_t kRenderStream = 1;
constexpr std::uint64_t kRobotCloudStream = 2;

json vec_json(const Vec7& v) {
  json out = json::array();
  for (int i = 0; i < kNumJoints; ++i) out.push_back(v[i]);
  return out;
}

Vec7 vec7_of(const json& j) {
  Vec7 v;
  for (int i = 0; i < kNumJoints; ++i) v[i] = j.at(i).get<double>();
  return v;
}

// Clearance is +inf in an obstacle-free scene; JSON carries that as null.
json clearance_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double clearance_of(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

ChunkSpec EpisodeConfig::chunk_spec(const RobotModel& model) const {
  ChunkSpec spec;
  spec.length = chunk_length;
  spec.scene_points = scene_points;
  spec.robot_points = robot_points;
  spec.tick = tick();
  spec.step_limit = speed_fraction * model.limits().velocity.minCoeff() * tick();
  return spec;
}

void EpisodeConfig::validate() const {
  if (!(tick_rate > 0.0)) throw InputError("episode: tick rate must be positive");
  if (horizon < 1) throw InputError("episode: horizon must be >= 1");
  if (scene_points < 1 || robot_points < 1) throw InputError("episode: cloud sizes must be >= 1");
  if (chunk_length < 1) throw InputError("episode: chunk length must be >= 1");
  if (!(speed_fraction > 0.0 && speed_fraction <= 1.0)) {
    throw InputError("episode: speed fraction must be in (0, 1]");
  }
  if (!(tau_dyn > 0.0)) throw InputError("episode: tau_dyn must be positive");
  if (noise_sigma < 0.0) throw InputError("episode: noise sigma must be >= 0");
  rmp.validate();
  repulsive.params.validate();
}

json EpisodeReport::to_json() const {
  json j = {{"family", family_name(family)},
            {"seed", seed},
            {"policy", policy},
            {"dcp_rmp", dcp_rmp},
            {"reached", reached},
            {"collided", collided},
            {"success", success},
            {"faulted", faulted},
            {"fault", fault},
            {"min_clearance", clearance_json(min_clearance)},
            {"ticks_to_reach", ticks_to_reach ? json(*ticks_to_reach) : json(nullptr)},
            {"ticks", ticks},
            {"final_pos_err", final_pos_err},
            {"final_ang_err", final_ang_err},
            {"min_goal_distance", clearance_json(min_goal_distance)}};
  if (!trajectory.empty()) {
    json traj = json::array();
    for (const auto& q : trajectory) traj.push_back(vec_json(q));
    j["trajectory"] = std::move(traj);
  }
  return j;
}

EpisodeReport EpisodeReport::from_json(const json& j) {
  EpisodeReport r;
  r.family = parse_family(j.at("family").get<std::string>());
  r.seed = j.at("seed").get<std::uint64_t>();
  r.policy = j.at("policy").get<std::string>();
  r.dcp_rmp = j.at("dcp_rmp").get<bool>();
  r.reached = j.at("reached").get<bool>();
  r.collided = j.at("collided").get<bool>();
  r.success = j.at("success").get<bool>();
  r.faulted = j.at("faulted").get<bool>();
  r.fault = j.at("fault").get<std::string>();
  r.min_clearance = clearance_of(j.at("min_clearance"));
  if (!j.at("ticks_to_reach").is_null()) r.ticks_to_reach = j.at("ticks_to_reach").get<int>();
  r.ticks = j.at("ticks").get<int>();
  r.final_pos_err = j.at("final_pos_err").get<double>();
  r.final_ang_err = j.at("final_ang_err").get<double>();
  r.min_goal_distance = clearance_of(j.at("min_goal_distance"));
  if (j.contains("trajectory")) {
    for (const auto& q : j.at("trajectory")) r.trajectory.push_back(vec7_of(q));
  }
  return r;
}

json TickRecord::to_json() const {
  json j = {{"tick", tick},
            {"q", vec_json(q)},
            {"q_goal", vec_json(q_goal)},
            {"clearance", clearance_json(clearance)},
            {"reached", reached}};
  if (proposal) {
    const json p = proposal->to_json();
    for (const char* key : {"x_r", "xdot_r", "M_r", "dynamic_points", "q_mg"}) j[key] = p.at(key);
  } else {
    j["x_r"] = nullptr;
  }
  return j;
}

EpisodeReport run_episode(const SceneSpec& spec, const RobotModel& model,
                          std::string_view policy_name, bool use_dcp_rmp,
                          const EpisodeConfig& config, const TickObserver& observer) {
  config.validate();
  spec.validate();

  EpisodeReport report;
  report.family = spec.family;
  report.seed = spec.seed;
  report.policy = std::string(policy_name);
  report.dcp_rmp = use_dcp_rmp;
  report.min_clearance = std::numeric_limits<double>::infinity();
  report.min_goal_distance = std::numeric_limits<double>::infinity();

  const double dt = config.tick();
  const ChunkSpec chunk_spec = config.chunk_spec(model);
  auto policy = make_policy(policy_name, model, config.repulsive, chunk_spec);
  const Rng streams(spec.seed);
  SceneWorld world(spec, config.horizon * dt + 1.0);
  const SceneRenderer renderer(spec, config.scene_points, streams.split(kRenderStream).key(),
                               config.noise_sigma);
  const RobotCloudSampler robot_sampler(model, config.robot_points,
                                        streams.split(kRobotCloudStream).key());
  const GoalProposalSettings settings{config.rmp, config.tau_dyn, dt};
  const bool persistent_goal = spec.family == Family::kDGB;

  GoalProposalState proposer = reset(spec.q_g);
  JointState robot{spec.q_start, Vec7::Zero()};
  SuccessCheck last;

  int t = 0;
  try {
    for (;; ++t) {
      const double now = t * dt;
      const auto placements = world.at(now);
      std::vector<Shape> shapes;
      for (const auto& p : placements) {
        if (p.active) shapes.push_back(p.shape);
      }
      const PosedRobot posed = pose_robot(model, robot.q);
      const CollisionResult hit = check_collision(model, posed, shapes);
      report.min_clearance = std::min(report.min_clearance, hit.clearance);
      report.collided = report.collided || hit.colliding;
      last = check_success(posed.pose.end_effector, spec.goal_position, spec.goal_orientation);
      report.min_goal_distance = std::min(report.min_goal_distance, last.pos_err);
      if (last.reached && !report.reached) {
        report.reached = true;
        report.ticks_to_reach = t;
        world.notify_reached(now);
      }
      if (config.log_trajectory) report.trajectory.push_back(robot.q);

      TickRecord record{t, robot.q, spec.q_g, hit.clearance, last.reached, std::nullopt};
      const bool done = (report.collided && config.stop_on_collision) ||
                        (report.reached && !persistent_goal) || t >= config.horizon;
      if (done) {
        if (observer) observer(record);
        break;
      }

      const PointCloud scene = renderer.render(placements, t);
      const PointCloud robot_cloud = robot_sampler.sample(posed);
      Vec7 q_goal = spec.q_g;
      if (use_dcp_rmp) {
        GoalProposal proposal = propose_goal(proposer, scene, model, robot, spec.q_g, settings);
        proposer = std::move(proposal.state);
        q_goal = proposal.q_mg;
        record.proposal = std::move(proposal.trace);
      }
      record.q_goal = q_goal;
      if (observer) observer(record);

      const ActionChunk chunk =
          plan_chunk(*policy, PolicyInput{scene, robot_cloud, robot.q, q_goal}, chunk_spec);
      robot = execute_first_delta(model, robot, chunk, dt);
      if (!robot.q.allFinite()) throw NumericalFault("executor produced a non-finite state");
    }
  } catch (const NumericalFault& e) {
    report.faulted = true;
    report.fault = e.what();
  } catch (const PolicyFault& e) {
    report.faulted = true;
    report.fault = e.what();
  }

  report.ticks = t;
  report.final_pos_err = last.pos_err;
  report.final_ang_err = last.ang_err;
  const bool at_goal_when_required = !persistent_goal || last.reached;
  report.success = !report.faulted && report.reached && !report.collided && at_goal_when_required;
  return report;
}

SuiteSummary aggregate(std::span<const EpisodeReport> reports) {
  if (reports.empty()) throw InputError("aggregate: no reports");
  SuiteSummary s;
  s.episodes = reports.size();
  std::size_t reached = 0, collided = 0, success = 0, counted = 0;
  double clearance = 0.0;
  for (const auto& r : reports) {
    if (r.faulted) {
      ++s.faults;
      continue;
    }
    ++counted;
    reached += r.reached;
    collided += r.collided;
    success += r.success;
    clearance += r.min_clearance;
  }
  if (counted > 0) {
    const double n = static_cast<double>(counted);
    s.reach_rate = 100.0 * static_cast<double>(reached) / n;
    s.collision_rate = 100.0 * static_cast<double>(collided) / n;
    s.success_rate = 100.0 * static_cast<double>(success) / n;
    s.mean_min_clearance = clearance / n;
  }
  return s;
}

std::string summary_csv_row(std::string_view family, std::string_view policy, bool dcp_rmp,
                            const SuiteSummary& s) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.*s,%.*s,%d,%zu,%.2f,%.2f,%.2f,%.6f,%zu",
                static_cast<int>(family.size()), family.data(), static_cast<int>(policy.size()),
                policy.data(), dcp_rmp ? 1 : 0, s.episodes, s.reach_rate, s.collision_rate,
                s.success_rate, s.mean_min_clearance, s.faults);
  return buf;
}

}  // namespace reflex
