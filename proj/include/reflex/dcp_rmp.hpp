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
#include <optional>

#include <nlohmann/json.hpp>

#include "reflex/kinematics.hpp"
#include "reflex/perception.hpp"
#include "reflex/rmp.hpp"

namespace reflex {

/// Virtual goal particle plus the previous frame it is differenced against.
/// The previous cloud is a shared, immutable snapshot, so copying a state
/// is cheap.
struct GoalProposalState {
  Vec7 q_mg = Vec7::Zero();
  Vec7 qdot_mg = Vec7::Zero();
  std::shared_ptr<const PointCloud> prev_cloud;
  std::optional<double> prev_x_r;
};

GoalProposalState reset(const Vec7& q_g);

struct GoalProposalSettings {
  RmpParams params;
  double tau_dyn = 0.01;  // m
  double tick = 0.02;     // s
};

/// What happened inside one proposal tick; serialized as the per-tick
/// debug record.
struct ProposalTrace {
  std::int64_t tick = 0;
  std::size_t dynamic_points = 0;
  std::optional<double> x_r;
  std::optional<double> xdot_r;
  std::optional<double> M_r;
  Vec7 qddot = Vec7::Zero();
  Vec7 q_mg = Vec7::Zero();

  nlohmann::json to_json() const;
};

struct GoalProposal {
  Vec7 q_mg;
  GoalProposalState state;
  ProposalTrace trace;
};

/// One tick of the goal proposer: difference the scene against the last
/// frame, repel the virtual goal from the closest dynamic point, pull it
/// back toward q_g, integrate and clamp to joint limits.
///
/// Only perception and robot state go in; nothing about the downstream
/// policy is visible here. Throws NumericalFault if the integration
/// produces a non-finite value.
GoalProposal propose_goal(const GoalProposalState& state, const PointCloud& scene,
                          const RobotModel& model, const JointState& robot, const Vec7& q_g,
                          const GoalProposalSettings& settings);

}  // namespace reflex
