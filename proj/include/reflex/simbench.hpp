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

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reflex/dcp_rmp.hpp"
#include "reflex/kinematics.hpp"
#include "reflex/policy.hpp"
#include "reflex/rng.hpp"
#include "reflex/scene.hpp"

namespace reflex {

// ---------------------------------------------------------------------------
// Rendering

/// Area-stratified surface samples of the active primitives. Primitive k
/// always draws its points from the same fixed stream, so a primitive that
/// does not move produces identical points from tick to tick.
class SceneRenderer {
 public:
  SceneRenderer(const SceneSpec& spec, std::size_t n, std::uint64_t seed, double noise_sigma = 0.0);

  PointCloud render(std::span<const SceneWorld::Placement> placements, std::int64_t tick) const;

 private:
  std::size_t n_;
  std::uint64_t seed_;
  double sigma_;
  std::vector<double> areas_;
  std::vector<std::vector<Vec3>> local_;  // per primitive, relative to its center
  std::vector<Vec3> backdrop_;
};

/// Convenience wrapper: world state at tick t under the given tick rate.
PointCloud render_scene_cloud(const SceneSpec& spec, std::int64_t tick, std::size_t n,
                              std::uint64_t seed, double tick_rate = 50.0,
                              double noise_sigma = 0.0);

/// Points sampled uniformly over one primitive's surface, relative to its
/// center.
std::vector<Vec3> sample_surface(const Shape& shape, std::size_t n, Rng& rng);

// ---------------------------------------------------------------------------
// Ground-truth checks

struct CollisionResult {
  bool colliding = false;
  double clearance = 0.0;  // signed minimum over robot sphere / primitive pairs
};

CollisionResult check_collision(const RobotModel& model, const PosedRobot& posed,
                                std::span<const Shape> obstacles);
CollisionResult check_collision(const RobotModel& model, const Vec7& q, const SceneSpec& spec,
                                std::int64_t tick, double tick_rate = 50.0);

inline constexpr double kReachPositionTolerance = 0.01;  // m
inline constexpr double kReachAngleTolerance = 15.0;     // deg

struct SuccessCheck {
  bool reached = false;
  double pos_err = 0.0;  // m
  double ang_err = 0.0;  // deg
};

SuccessCheck check_success(const Transform& end_effector, const Vec3& goal_position,
                           const Eigen::Quaterniond& goal_orientation);
SuccessCheck check_success(const RobotModel& model, const Vec7& q, const Vec3& goal_position,
                           const Eigen::Quaterniond& goal_orientation);

/// Geodesic angle between two orientations, degrees.
double quaternion_angle_deg(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

// ---------------------------------------------------------------------------
// Execution

/// Applies the chunk's first delta through a velocity- and
/// acceleration-limited integrator. The rest of the chunk is used only as
/// lookahead for braking.
JointState execute_first_delta(const RobotModel& model, const JointState& state,
                               const ActionChunk& chunk, double tick);

// ---------------------------------------------------------------------------
// Scenario generation

struct DifficultyConfig {
  int se_min_obstacles = 3;
  int se_max_obstacles = 8;
  int lite_min_obstacles = 1;
  int lite_max_obstacles = 3;
  double path_margin = 0.05;  // m, static clearance kept along the nominal path
  int fdo_min_spheres = 1;
  int fdo_max_spheres = 3;
  double fdo_min_speed = 0.6;  // m/s
  double fdo_max_speed = 1.0;
  double fdo_min_radius = 0.05;
  double fdo_max_radius = 0.09;
  double fdo_region_margin = 0.45;     // roaming box = swept robot AABB grown by this
  double fdo_start_clearance = 0.25;  // from the start configuration
  double fdo_goal_region = 0.0;  // > 0: roam a cube of this half-size around the goal instead
  double dgb_min_speed = 0.6;
  double dgb_max_speed = 1.0;
  double dgb_min_radius = 0.06;
  double dgb_max_radius = 0.09;
  double dgb_delay = 0.5;  // s after first reach
  double sao_appear_fraction = 0.35;  // of nominal travel time

  static DifficultyConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

SceneSpec generate_scenario(Family family, std::uint64_t seed, const DifficultyConfig& difficulty,
                            const RobotModel& model);

/// Checks a dense sampling of the straight joint-space segment.
bool straight_path_clear(const RobotModel& model, const Vec7& a, const Vec7& b,
                         std::span<const Shape> obstacles, double margin, int samples = 64);

/// Feasibility oracle: straight-line witness first, then a bounded
/// RRT-Connect search in joint space. Returns a collision-free waypoint
/// path when one is found.
std::optional<std::vector<Vec7>> find_feasible_path(const RobotModel& model, const Vec7& start,
                                                    const Vec7& goal,
                                                    std::span<const Shape> obstacles,
                                                    std::uint64_t seed, int max_iterations = 3000);

// ---------------------------------------------------------------------------
// Episodes

struct EpisodeConfig {
  double tick_rate = 50.0;  // Hz
  int horizon = 1000;       // ticks
  std::size_t scene_points = 2048;
  std::size_t robot_points = 256;
  std::size_t chunk_length = 10;
  double speed_fraction = 1.0;  // policy step cap as a fraction of the velocity limit
  double noise_sigma = 0.0;
  double tau_dyn = 0.01;
  bool stop_on_collision = true;
  bool log_trajectory = false;
  RmpParams rmp;
  RepulsiveSettings repulsive;

  double tick() const { return 1.0 / tick_rate; }
  ChunkSpec chunk_spec(const RobotModel& model) const;
  void validate() const;
};

struct EpisodeReport {
  Family family = Family::kSE;
  std::uint64_t seed = 0;
  std::string policy;
  bool dcp_rmp = false;
  bool reached = false;
  bool collided = false;
  bool success = false;
  bool faulted = false;
  std::string fault;
  double min_clearance = 0.0;
  std::optional<int> ticks_to_reach;
  int ticks = 0;
  double final_pos_err = 0.0;
  double final_ang_err = 0.0;
  double min_goal_distance = 0.0;  // closest end-effector approach to the goal position
  std::vector<Vec7> trajectory;

  nlohmann::json to_json() const;
  static EpisodeReport from_json(const nlohmann::json& j);
};

/// Everything observed on one tick, for tracing.
struct TickRecord {
  std::int64_t tick = 0;
  Vec7 q = Vec7::Zero();
  Vec7 q_goal = Vec7::Zero();  // what the policy was asked to reach
  double clearance = 0.0;
  bool reached = false;
  std::optional<ProposalTrace> proposal;

  nlohmann::json to_json() const;
};

using TickObserver = std::function<void(const TickRecord&)>;

EpisodeReport run_episode(const SceneSpec& spec, const RobotModel& model,
                          std::string_view policy_name, bool use_dcp_rmp,
                          const EpisodeConfig& config, const TickObserver& observer = {});

struct SuiteSummary {
  std::size_t episodes = 0;
  std::size_t faults = 0;
  double reach_rate = 0.0;      // percent of non-faulted episodes
  double collision_rate = 0.0;  // percent
  double success_rate = 0.0;    // percent
  double mean_min_clearance = 0.0;
};

SuiteSummary aggregate(std::span<const EpisodeReport> reports);

inline constexpr const char* kSummaryCsvHeader =
    "family,policy,dcp_rmp,episodes,reach_rate,collision_rate,success_rate,mean_min_clearance,"
    "faults";

std::string summary_csv_row(std::string_view family, std::string_view policy, bool dcp_rmp,
                            const SuiteSummary& s);

}  // namespace reflex
