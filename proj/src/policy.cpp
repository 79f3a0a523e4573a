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

#include "reflex/policy.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace reflex {

namespace {

// Straight-line step from q toward goal with sup-norm at most `limit`.
Vec7 clipped_step(const Vec7& q, const Vec7& goal, double limit) {
  const Vec7 diff = goal - q;
  const double span = diff.lpNorm<Eigen::Infinity>();
  if (span <= limit) return diff;
  return diff * (limit / span);
}

void check_input(const PolicyInput& input, const ChunkSpec& spec) {
  if (input.scene_cloud.size() != spec.scene_points) {
    throw InputError("policy input: scene cloud has " + std::to_string(input.scene_cloud.size()) +
                     " points, expected " + std::to_string(spec.scene_points));
  }
  if (input.robot_cloud.size() != spec.robot_points) {
    throw InputError("policy input: robot cloud has " + std::to_string(input.robot_cloud.size()) +
                     " points, expected " + std::to_string(spec.robot_points));
  }
  if (!input.q_c.allFinite() || !input.q_goal.allFinite()) {
    throw InputError("policy input: non-finite joint vector");
  }
}

}  // namespace

void validate_chunk(const ActionChunk& chunk, const ChunkSpec& spec) {
  if (chunk.deltas.size() != spec.length) {
    throw PolicyFault("action chunk has " + std::to_string(chunk.deltas.size()) +
                      " deltas, expected " + std::to_string(spec.length));
  }
  // Allow for the rounding in a rescaled step.
  const double bound = spec.step_limit * (1.0 + 1e-12);
  for (const auto& d : chunk.deltas) {
    if (!d.allFinite()) throw PolicyFault("action chunk contains a non-finite delta");
    if (d.lpNorm<Eigen::Infinity>() > bound) {
      throw PolicyFault("action chunk delta exceeds the per-tick limit");
    }
  }
}

ActionChunk plan_chunk(Policy& policy, const PolicyInput& input, const ChunkSpec& spec) {
  check_input(input, spec);
  ActionChunk chunk = policy.plan(input);
  validate_chunk(chunk, spec);
  return chunk;
}

ActionChunk baseline_interpolator(const PolicyInput& input, const ChunkSpec& spec) {
  ActionChunk chunk;
  chunk.deltas.reserve(spec.length);
  Vec7 q = input.q_c;
  for (std::size_t s = 0; s < spec.length; ++s) {
    const Vec7 step = clipped_step(q, input.q_goal, spec.step_limit);
    chunk.deltas.push_back(step);
    q += step;
  }
  return chunk;
}

ActionChunk InterpolatorPolicy::plan(const PolicyInput& input) {
  return baseline_interpolator(input, spec_);
}

RmpParams RepulsiveSettings::default_params() {
  RmpParams p;
  p.k_p = 4.0;
  p.ell_p = 0.005;
  p.k_v = 0.0;
  p.mu_r = 1.0;
  p.ell_m = 0.005;
  p.r = 0.01;  // 10 cm
  return p;
}

Vec7 static_repulsion(const RobotModel& model, const Vec7& q, const std::vector<Vec3>& obstacles,
                      const RmpParams& params, const JointSpaceRmp& attract) {
  const PosedRobot posed = pose_robot(model, q);
  std::vector<JointSpaceRmp> rmps;
  rmps.reserve(obstacles.size() + 1);
  for (const auto& x_obs : obstacles) {
    const SurfacePoint x_p = closest_surface_point(posed, model, x_obs);
    const auto task = repulsor_coordinates(x_p.position, x_obs, point_jacobian(posed.pose, model, x_p));
    const TaskRmp rep = repulsor_task(task.x_r, 0.0, params);
    if (rep.M == 0.0) continue;
    rmps.push_back(pullback(rep.f, rep.M, task.J_r));
  }
  rmps.push_back(attract);
  return combine(rmps);
}

RepulsivePolicy::RepulsivePolicy(const RobotModel& model, RepulsiveSettings settings,
                                 ChunkSpec spec)
    : model_(model), settings_(std::move(settings)), spec_(spec) {
  settings_.params.validate();
  if (settings_.k_nearest < 1) throw InputError("repulsive policy: k_nearest must be >= 1");
}

ActionChunk baseline_repulsive(const PolicyInput& input, const RepulsiveSettings& settings,
                               const RobotModel& model, const ChunkSpec& spec) {
  const RmpParams& p = settings.params;
  const double reach = std::sqrt(p.r);

  // The K scene points nearest the robot surface that are inside the
  // metric cutoff; anything farther contributes a zero metric.
  const PosedRobot posed = pose_robot(model, input.q_c);
  Vec3 lo = posed.centers.front(), hi = lo;
  double max_radius = 0.0;
  for (std::size_t i = 0; i < posed.centers.size(); ++i) {
    lo = lo.cwiseMin(posed.centers[i]);
    hi = hi.cwiseMax(posed.centers[i]);
    max_radius = std::max(max_radius, model.spheres()[i].radius);
  }
  const Vec3 pad = Vec3::Constant(reach + max_radius);
  lo -= pad;
  hi += pad;
  std::vector<std::pair<double, std::size_t>> near;
  const auto& pts = input.scene_cloud.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if ((pts[i].array() < lo.array()).any() || (pts[i].array() > hi.array()).any()) continue;
    double d = 0.0;
    closest_surface_point(posed, model, pts[i], &d);
    if (d * d <= p.r || d < 0.0) near.emplace_back(d, i);
  }
  const std::size_t k = std::min(settings.k_nearest, near.size());
  std::partial_sort(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(k), near.end());
  std::vector<Vec3> obstacles;
  for (std::size_t i = 0; i < k; ++i) obstacles.push_back(pts[near[i].second]);

  ActionChunk chunk;
  chunk.deltas.reserve(spec.length);
  Vec7 q = input.q_c;
  Vec7 v = Vec7::Zero();
  const double h = spec.tick;
  for (std::size_t s = 0; s < spec.length; ++s) {
    const Vec7 v_nominal = clipped_step(q, input.q_goal, spec.step_limit) / h;
    // Deadbeat attractor: alone it reproduces the interpolator's velocity.
    JointSpaceRmp attract;
    attract.f = (v_nominal - v) / h;
    attract.M = p.mu_g * Mat7::Identity();
    const Vec7 qddot = obstacles.empty() ? Vec7(attract.f)
                                         : static_repulsion(model, q, obstacles, p, attract);
    v += qddot * h;
    const double step = v.lpNorm<Eigen::Infinity>() * h;
    if (step > spec.step_limit) v *= spec.step_limit / step;
    const Vec7 delta = v * h;
    chunk.deltas.push_back(delta);
    q += delta;
  }
  return chunk;
}

ActionChunk RepulsivePolicy::plan(const PolicyInput& input) {
  return baseline_repulsive(input, settings_, model_, spec_);
}

const std::vector<std::string>& policy_names() {
  static const std::vector<std::string> names{"interpolator", "repulsive"};
  return names;
}

std::unique_ptr<Policy> make_policy(std::string_view name, const RobotModel& model,
                                    const RepulsiveSettings& repulsive, const ChunkSpec& spec) {
  if (name == "interpolator") return std::make_unique<InterpolatorPolicy>(spec);
  if (name == "repulsive") return std::make_unique<RepulsivePolicy>(model, repulsive, spec);
  throw InputError("unknown policy '" + std::string(name) + "'");
}

}  // namespace reflex
