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

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "reflex/kinematics.hpp"
#include "reflex/point_cloud.hpp"
#include "reflex/rmp.hpp"

namespace reflex {

/// S delta joint-position commands; the executor runs only the first.
struct ActionChunk {
  std::vector<Vec7> deltas;
};

/// Everything a downstream policy may observe. There is deliberately no
/// access to obstacle ground truth.
struct PolicyInput {
  const PointCloud& scene_cloud;
  const PointCloud& robot_cloud;
  Vec7 q_c;
  Vec7 q_goal;
};

struct ChunkSpec {
  std::size_t length = 10;
  std::size_t scene_points = 2048;
  std::size_t robot_points = 256;
  double tick = 0.02;           // s
  double step_limit = 0.0435;  // rad per tick, sup-norm
};

/// Raised when a policy breaks its contract; the harness treats it as an
/// episode-level fault.
class PolicyFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string_view name() const = 0;
  virtual ActionChunk plan(const PolicyInput& input) = 0;
};

/// Validates the input, runs the policy, and re-validates the chunk.
ActionChunk plan_chunk(Policy& policy, const PolicyInput& input, const ChunkSpec& spec);

void validate_chunk(const ActionChunk& chunk, const ChunkSpec& spec);

/// Straight joint-space line toward the goal, every step clipped to the
/// per-tick limit. Ignores both clouds.
class InterpolatorPolicy final : public Policy {
 public:
  explicit InterpolatorPolicy(ChunkSpec spec) : spec_(spec) {}
  std::string_view name() const override { return "interpolator"; }
  ActionChunk plan(const PolicyInput& input) override;

 private:
  ChunkSpec spec_;
};

ActionChunk baseline_interpolator(const PolicyInput& input, const ChunkSpec& spec);

struct RepulsiveSettings {
  RmpParams params = default_params();
  std::size_t k_nearest = 8;

  static RmpParams default_params();
};

/// Goal seeking with static-geometry repulsion: the K scene points nearest
/// the robot surface each contribute a repulsor (zero closing speed),
/// combined with a velocity-tracking attractor toward the interpolator's
/// nominal step.
class RepulsivePolicy final : public Policy {
 public:
  RepulsivePolicy(const RobotModel& model, RepulsiveSettings settings, ChunkSpec spec);
  std::string_view name() const override { return "repulsive"; }
  ActionChunk plan(const PolicyInput& input) override;

 private:
  const RobotModel& model_;
  RepulsiveSettings settings_;
  ChunkSpec spec_;
};

ActionChunk baseline_repulsive(const PolicyInput& input, const RepulsiveSettings& settings,
                               const RobotModel& model, const ChunkSpec& spec);

/// Repulsive joint accelerations at q from a fixed set of obstacle points,
/// combined with `attract` (which may carry a zero metric).
Vec7 static_repulsion(const RobotModel& model, const Vec7& q, const std::vector<Vec3>& obstacles,
                      const RmpParams& params, const JointSpaceRmp& attract);

const std::vector<std::string>& policy_names();

/// "interpolator" or "repulsive"; throws InputError otherwise.
std::unique_ptr<Policy> make_policy(std::string_view name, const RobotModel& model,
                                    const RepulsiveSettings& repulsive, const ChunkSpec& spec);

}  // namespace reflex
