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

#include "reflex/dcp_rmp.hpp"

#include <array>

namespace reflex {

namespace {

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

GoalProposalState reset(const Vec7& q_g) {
  GoalProposalState state;
  state.q_mg = q_g;
  state.qdot_mg = Vec7::Zero();
  return state;
}

nlohmann::json ProposalTrace::to_json() const {
  nlohmann::json q = nlohmann::json::array();
  for (int i = 0; i < kNumJoints; ++i) q.push_back(q_mg[i]);
  return {{"tick", tick},    {"x_r", opt(x_r)},  {"xdot_r", opt(xdot_r)},
          {"M_r", opt(M_r)}, {"dynamic_points", dynamic_points}, {"q_mg", q}};
}

GoalProposal propose_goal(const GoalProposalState& state, const PointCloud& scene,
                          const RobotModel& model, const JointState& robot, const Vec7& q_g,
                          const GoalProposalSettings& settings) {
  if (!(settings.tick > 0.0)) throw InputError("propose_goal: tick must be positive");
  if (scene.empty()) throw InputError("propose_goal: empty scene cloud");

  GoalProposal out{state.q_mg, state, {}};
  out.trace.tick = scene.stamp;
  GoalProposalState& next = out.state;

  DynamicPointSet dyn;
  dyn.status = DynamicPointSet::Status::kNoPreviousFrame;
  if (state.prev_cloud) dyn = extract_dynamic_points(*state.prev_cloud, scene, settings.tau_dyn);
  out.trace.dynamic_points = dyn.size();

  const RmpParams& p = settings.params;
  std::array<JointSpaceRmp, 2> rmps;
  next.prev_x_r.reset();
  if (!dyn.empty()) {
    const PosedRobot posed = pose_robot(model, robot.q);
    const auto closest = closest_dynamic_to_robot(dyn, posed, model);
    const Jacobian3x7 J_p = point_jacobian(posed.pose, model, closest->x_p);
    TaskSpaceRepulsor task = repulsor_coordinates(closest->x_p.position, closest->x_obs, J_p);
    task.xdot_r = state.prev_x_r ? (task.x_r - *state.prev_x_r) / settings.tick : 0.0;
    const TaskRmp rep = repulsor_task(task.x_r, task.xdot_r, p);
    rmps[0] = pullback(rep.f, rep.M, task.J_r);
    next.prev_x_r = task.x_r;
    out.trace.x_r = task.x_r;
    out.trace.xdot_r = task.xdot_r;
    out.trace.M_r = rep.M;
  }
  rmps[1] = attractor(state.q_mg, state.qdot_mg, q_g, p);

  const Vec7 qddot = combine(rmps);
  VirtualState virt = euler_integrate({state.q_mg, state.qdot_mg}, qddot, p);
  if (!virt.q.allFinite() || !virt.qdot.allFinite()) {
    throw NumericalFault("propose_goal: virtual goal diverged at tick " +
                         std::to_string(scene.stamp));
  }
  const JointLimits& lim = model.limits();
  for (int j = 0; j < kNumJoints; ++j) {
    if (virt.q[j] < lim.lower[j] || virt.q[j] > lim.upper[j]) {
      virt.q[j] = std::clamp(virt.q[j], lim.lower[j], lim.upper[j]);
      virt.qdot[j] = 0.0;
    }
  }
  next.q_mg = virt.q;
  next.qdot_mg = virt.qdot;
  next.prev_cloud = std::make_shared<const PointCloud>(scene);

  out.q_mg = next.q_mg;
  out.trace.qddot = qddot;
  out.trace.q_mg = next.q_mg;
  return out;
}

}  // namespace reflex
