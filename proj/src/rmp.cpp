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

#include "reflex/rmp.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace reflex {

namespace {

constexpr double kPinvCutoff = 1e-10;

template <typename Fn>
void for_each_field(RmpParams& p, Fn&& fn) {
  fn("k_g", p.k_g);
  fn("k_d", p.k_d);
  fn("mu_g", p.mu_g);
  fn("k_p", p.k_p);
  fn("ell_p", p.ell_p);
  fn("k_v", p.k_v);
  fn("l_v", p.l_v);
  fn("ell_d", p.ell_d);
  fn("eps_d", p.eps_d);
  fn("mu_r", p.mu_r);
  fn("ell_m", p.ell_m);
  fn("eps_m", p.eps_m);
  fn("r", p.r);
  fn("n_int", p.n_int);
  fn("dt_int", p.dt_int);
}

}  // namespace

void RmpParams::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InputError(std::string("rmp params: ") + name + " must be positive");
    }
  };
  positive(ell_p, "ell_p");
  positive(l_v, "l_v");
  positive(ell_d, "ell_d");
  positive(ell_m, "ell_m");
  positive(eps_d, "eps_d");
  positive(eps_m, "eps_m");
  positive(r, "r");
  positive(mu_g, "mu_g");
  positive(dt_int, "dt_int");
  if (n_int < 1) throw InputError("rmp params: n_int must be >= 1");
  if (!(mu_r >= 0.0)) throw InputError("rmp params: mu_r must be non-negative");
}

const std::vector<std::string>& RmpParams::field_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    RmpParams p;
    for_each_field(p, [&](const char* name, auto&) { out.emplace_back(name); });
    return out;
  }();
  return names;
}

void RmpParams::set(const std::string& name, double value) {
  bool found = false;
  for_each_field(*this, [&](const char* field, auto& slot) {
    if (name != field) return;
    found = true;
    using T = std::decay_t<decltype(slot)>;
    if constexpr (std::is_same_v<T, int>) {
      if (value != std::floor(value)) throw InputError("rmp params: n_int must be an integer");
      slot = static_cast<int>(value);
    } else {
      slot = value;
    }
  });
  if (!found) throw InputError("rmp params: unknown field '" + name + "'");
}

RmpParams RmpParams::from_json(const nlohmann::json& j, RmpParams base) {
  if (!j.is_object()) throw InputError("rmp params: expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw InputError("rmp params: '" + key + "' must be numeric");
    base.set(key, value.get<double>());
  }
  base.validate();
  return base;
}

RmpParams RmpParams::from_json(const nlohmann::json& j) { return from_json(j, RmpParams{}); }

nlohmann::json RmpParams::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  RmpParams copy = *this;
  for_each_field(copy, [&](const char* name, auto& slot) { j[name] = slot; });
  return j;
}

Mat7 pseudo_inverse(const Mat7& A) {
  Eigen::JacobiSVD<Mat7> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sigma = svd.singularValues();
  const double cutoff = kPinvCutoff * sigma[0];
  Vec7 inv = Vec7::Zero();
  for (int i = 0; i < 7; ++i) {
    if (sigma[i] > cutoff && sigma[i] > 0.0) inv[i] = 1.0 / sigma[i];
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

double closing_gate(double xdot_r, double l_v) {
  return 1.0 - 1.0 / (1.0 + std::exp(-xdot_r / l_v));
}

double cutoff_weight(double x_r, double r) {
  if (x_r > r) return 0.0;
  const double d = x_r - r;
  return d * d / (r * r);
}

JointSpaceRmp attractor(const Vec7& q, const Vec7& qdot, const Vec7& q_goal, const RmpParams& p) {
  JointSpaceRmp out;
  out.f = p.k_g * (q_goal - q) - p.k_d * qdot;
  out.M = p.mu_g * Mat7::Identity();
  return out;
}

TaskRmp repulsor_task(double x_r, double xdot_r, const RmpParams& p) {
  if (!(x_r >= 0.0)) throw InputError("repulsor_task: x_r must be non-negative");
  const double gate = closing_gate(xdot_r, p.l_v);
  TaskRmp out;
  out.f = p.k_p * std::exp(-x_r / p.ell_p) - p.k_v * gate * xdot_r / (x_r / p.ell_d + p.eps_d);
  out.M = gate * cutoff_weight(x_r, p.r) * p.mu_r / (x_r / p.ell_m + p.eps_m);
  return out;
}

TaskSpaceRepulsor repulsor_coordinates(const Vec3& x_p, const Vec3& x_obs,
                                       const Jacobian3x7& J_p, double xdot_r) {
  const Vec3 diff = x_p - x_obs;
  TaskSpaceRepulsor out;
  out.x_r = diff.squaredNorm();
  out.xdot_r = xdot_r;
  out.J_r = 2.0 * diff.transpose() * J_p;
  return out;
}

JointSpaceRmp pullback(double f_task, double M_task, const Row7& J_r) {
  if (!J_r.allFinite()) throw InputError("pullback: non-finite Jacobian");
  JointSpaceRmp out;
  if (M_task == 0.0 || J_r.isZero(0.0)) return out;
  out.M = J_r.transpose() * M_task * J_r;
  out.f = pseudo_inverse(out.M) * (J_r.transpose() * (M_task * f_task));
  return out;
}

Vec7 combine(std::span<const JointSpaceRmp> rmps) {
  if (rmps.empty()) throw InputError("combine: no policies");
  Mat7 metric = Mat7::Zero();
  Vec7 weighted = Vec7::Zero();
  for (const auto& rmp : rmps) {
    metric += rmp.M;
    weighted += rmp.M * rmp.f;
  }
  if (metric.isZero(0.0)) return Vec7::Zero();
  return pseudo_inverse(metric) * weighted;
}

VirtualState euler_integrate(const VirtualState& state, const Vec7& qddot, const RmpParams& p) {
  if (p.n_int < 1 || !(p.dt_int > 0.0)) throw InputError("euler_integrate: bad step settings");
  VirtualState out = state;
  for (int i = 0; i < p.n_int; ++i) {
    out.qdot += qddot * p.dt_int;
    out.q += out.qdot * p.dt_int;
  }
  return out;
}

}  // namespace reflex
