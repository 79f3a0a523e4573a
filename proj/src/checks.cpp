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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "reflex/simbench.hpp"

namespace reflex {

CollisionResult check_collision(const RobotModel& model, const PosedRobot& posed,
                                std::span<const Shape> obstacles) {
  CollisionResult out;
  out.clearance = std::numeric_limits<double>::infinity();
  const auto& spheres = model.spheres();
  for (const Shape& shape : obstacles) {
    for (std::size_t i = 0; i < spheres.size(); ++i) {
      out.clearance =
          std::min(out.clearance, sphere_clearance(shape, posed.centers[i], spheres[i].radius));
    }
  }
  out.colliding = out.clearance < 0.0;
  return out;
}

CollisionResult check_collision(const RobotModel& model, const Vec7& q, const SceneSpec& spec,
                                std::int64_t tick, double tick_rate) {
  const double t = static_cast<double>(tick) / tick_rate;
  const SceneWorld world(spec, t + 1.0);
  const auto shapes = world.active_shapes(t);
  return check_collision(model, pose_robot(model, q), shapes);
}

double quaternion_angle_deg(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b) {
  const double dot = std::min(1.0, std::abs(a.normalized().dot(b.normalized())));
  return 2.0 * std::acos(dot) * 180.0 / std::numbers::pi;
}

SuccessCheck check_success(const Transform& end_effector, const Vec3& goal_position,
                           const Eigen::Quaterniond& goal_orientation) {
  SuccessCheck out;
  out.pos_err = (end_effector.translation() - goal_position).norm();
  out.ang_err = quaternion_angle_deg(Eigen::Quaterniond(end_effector.linear()), goal_orientation);
  out.reached = out.pos_err <= kReachPositionTolerance && out.ang_err <= kReachAngleTolerance;
  return out;
}

SuccessCheck check_success(const RobotModel& model, const Vec7& q, const Vec3& goal_position,
                           const Eigen::Quaterniond& goal_orientation) {
  return check_success(forward_kinematics(model, q).end_effector, goal_position, goal_orientation);
}

JointState execute_first_delta(const RobotModel& model, const JointState& state,
                               const ActionChunk& chunk, double tick) {
  if (chunk.deltas.empty()) throw InputError("executor: empty action chunk");
  const JointLimits& lim = model.limits();
  Vec7 lookahead = Vec7::Zero();
  for (const auto& d : chunk.deltas) lookahead += d;

  // All limits are applied as uniform scalings so the commanded direction
  // in joint space is preserved.
  Vec7 v_des = chunk.deltas.front() / tick;
  double scale = 1.0;
  for (int j = 0; j < kNumJoints; ++j) {
    const double mag = std::abs(v_des[j]);
    if (mag == 0.0) continue;
    scale = std::min(scale, lim.velocity[j] / mag);
    // Brake so the joint can stop before the end of the lookahead.
    if (v_des[j] * lookahead[j] > 0.0) {
      scale = std::min(scale, std::sqrt(2.0 * lim.acceleration[j] * std::abs(lookahead[j])) / mag);
    }
  }
  v_des *= scale;

  const Vec7 dv = v_des - state.qdot;
  double accel_scale = 1.0;
  for (int j = 0; j < kNumJoints; ++j) {
    const double mag = std::abs(dv[j]);
    if (mag > 0.0) accel_scale = std::min(accel_scale, lim.acceleration[j] * tick / mag);
  }
  JointState next;
  next.qdot = state.qdot + accel_scale * dv;
  next.q = state.q + next.qdot * tick;
  for (int j = 0; j < kNumJoints; ++j) {
    if (next.q[j] < lim.lower[j] || next.q[j] > lim.upper[j]) {
      next.q[j] = std::clamp(next.q[j], lim.lower[j], lim.upper[j]);
      next.qdot[j] = 0.0;
    }
  }
  return next;
}

}  // namespace reflex
