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

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "reflex/types.hpp"

namespace reflex {

/// Gains and shape parameters of the attractor/repulsor pair, plus the
/// Euler sub-stepping used to integrate the combined acceleration.
/// Length scales act on the squared-distance task coordinate (m^2).
/// Defaults were tuned on the simulated benchmark and match
/// config/default.json. With k_p = 0 the repulsor is purely velocity-gated,
/// so an obstacle that merely sits nearby does not hold the goal away.
struct RmpParams {
  double k_g = 100.0;
  double k_d = 20.0;  // 2 * sqrt(k_g): critically damped
  double mu_g = 1.0;
  double k_p = 0.0;
  double ell_p = 0.05;
  double k_v = 12.0;
  double l_v = 0.4;
  double ell_d = 0.1;
  double eps_d = 1e-3;
  double mu_r = 75.0;
  double ell_m = 0.01;
  double eps_m = 1e-3;
  double r = 0.2;
  int n_int = 5;
  double dt_int = 0.004;

  /// Throws InputError if a scale, regularizer or step setting is out of range.
  void validate() const;

  /// Assigns one field by name; throws InputError for an unknown name.
  void set(const std::string& name, double value);

  static const std::vector<std::string>& field_names();
  static RmpParams from_json(const nlohmann::json& j, RmpParams base);
  static RmpParams from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// An acceleration and its priority metric in joint space.
struct JointSpaceRmp {
  Vec7 f = Vec7::Zero();
  Mat7 M = Mat7::Zero();
};

struct TaskSpaceRepulsor {
  double x_r = 0.0;     // squared distance, m^2
  double xdot_r = 0.0;  // m^2/s
  Row7 J_r = Row7::Zero();
};

struct TaskRmp {
  double f = 0.0;
  double M = 0.0;
};

/// Moore-Penrose pseudoinverse via SVD; singular values below
/// 1e-10 * sigma_max are treated as zero.
Mat7 pseudo_inverse(const Mat7& A);

/// 1 - 1 / (1 + exp(-v / l_v)): ~1 for approaching, ~0 for receding.
double closing_gate(double xdot_r, double l_v);

/// (x - r)^2 / r^2 inside the cutoff, 0 beyond it.
double cutoff_weight(double x_r, double r);

JointSpaceRmp attractor(const Vec7& q, const Vec7& qdot, const Vec7& q_goal, const RmpParams& p);

TaskRmp repulsor_task(double x_r, double xdot_r, const RmpParams& p);

/// x_r = |x_p - x_obs|^2 and J_r = 2 (x_p - x_obs)^T J_p.
TaskSpaceRepulsor repulsor_coordinates(const Vec3& x_p, const Vec3& x_obs,
                                       const Jacobian3x7& J_p, double xdot_r = 0.0);

JointSpaceRmp pullback(double f_task, double M_task, const Row7& J_r);

/// pinv(sum M_i) * sum(M_i f_i).
Vec7 combine(std::span<const JointSpaceRmp> rmps);

struct VirtualState {
  Vec7 q = Vec7::Zero();
  Vec7 qdot = Vec7::Zero();
};

/// n_int semi-implicit Euler sub-steps with qddot held fixed.
VirtualState euler_integrate(const VirtualState& state, const Vec7& qddot, const RmpParams& p);

}  // namespace reflex
