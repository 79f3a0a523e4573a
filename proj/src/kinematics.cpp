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

#include "reflex/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "reflex/rng.hpp"

namespace reflex {

namespace {

using nlohmann::json;

Vec3 vec3_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) {
    throw InputError(std::string("robot model: ") + what + " must be a 3-array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Vec7 vec7_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != kNumJoints) {
    throw InputError(std::string("robot model: ") + what + " must be a 7-array");
  }
  Vec7 v;
  for (int i = 0; i < kNumJoints; ++i) v[i] = j[i].get<double>();
  return v;
}

Transform transform_from(const json& j, const char* what) {
  const Vec3 xyz = vec3_from(j.at("origin_xyz"), what);
  const json& qj = j.at("origin_quat_wxyz");
  if (!qj.is_array() || qj.size() != 4) {
    throw InputError(std::string("robot model: ") + what + " quaternion must be a 4-array");
  }
  Eigen::Quaterniond quat(qj[0].get<double>(), qj[1].get<double>(), qj[2].get<double>(),
                          qj[3].get<double>());
  if (std::abs(quat.norm() - 1.0) > 1e-6) {
    throw InputError(std::string("robot model: ") + what + " quaternion is not unit");
  }
  quat.normalize();
  Transform t = Transform::Identity();
  t.linear() = quat.toRotationMatrix();
  t.translation() = xyz;
  return t;
}

json transform_to(const Transform& t) {
  const Eigen::Quaterniond quat(t.linear());
  const Vec3& p = t.translation();
  return {{"origin_xyz", {p.x(), p.y(), p.z()}},
          {"origin_quat_wxyz", {quat.w(), quat.x(), quat.y(), quat.z()}}};
}

json vec_to(const auto& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

bool finite(const Vec7& q) { return q.allFinite(); }

}  // namespace

RobotModel::RobotModel(std::array<JointSpec, kNumJoints> joints, Transform flange,
                       JointLimits limits, std::vector<CollisionSphere> spheres)
    : joints_(std::move(joints)),
      flange_(std::move(flange)),
      limits_(std::move(limits)),
      spheres_(std::move(spheres)) {
  for (int j = 0; j < kNumJoints; ++j) {
    if (std::abs(joints_[j].axis.norm() - 1.0) > 1e-9) {
      throw InputError("robot model: joint " + std::to_string(j + 1) + " axis is not unit-norm");
    }
    if (!(limits_.lower[j] < limits_.upper[j])) {
      throw InputError("robot model: joint " + std::to_string(j + 1) + " has lower >= upper");
    }
    if (!(limits_.velocity[j] > 0.0) || !(limits_.acceleration[j] > 0.0)) {
      throw InputError("robot model: joint " + std::to_string(j + 1) +
                       " velocity/acceleration limits must be positive");
    }
  }
  if (spheres_.empty()) throw InputError("robot model: at least one collision sphere required");
  for (const auto& s : spheres_) {
    if (s.link < 0 || s.link >= kNumLinks) {
      throw InputError("robot model: sphere link index out of range");
    }
    if (!(s.radius > 0.0)) throw InputError("robot model: sphere radius must be positive");
  }
}

RobotModel RobotModel::from_json(const json& doc) {
  const json& jj = doc.at("joints");
  if (!jj.is_array() || jj.size() != kNumJoints) {
    throw InputError("robot model: exactly 7 joints required");
  }
  std::array<JointSpec, kNumJoints> joints;
  for (int j = 0; j < kNumJoints; ++j) {
    if (jj[j].contains("type") && jj[j]["type"] != "revolute") {
      throw InputError("robot model: only revolute joints are supported");
    }
    joints[j].origin = transform_from(jj[j], "joint origin");
    joints[j].axis = vec3_from(jj[j].at("axis"), "joint axis");
  }
  const json& lj = doc.at("limits");
  JointLimits limits{vec7_from(lj.at("lower"), "limits.lower"),
                     vec7_from(lj.at("upper"), "limits.upper"),
                     vec7_from(lj.at("vel"), "limits.vel"), vec7_from(lj.at("acc"), "limits.acc")};
  std::vector<CollisionSphere> spheres;
  for (const auto& sj : doc.at("spheres")) {
    spheres.push_back({sj.at("link").get<int>(), vec3_from(sj.at("center"), "sphere center"),
                       sj.at("radius").get<double>()});
  }
  return RobotModel(joints, transform_from(doc.at("flange"), "flange"), limits,
                    std::move(spheres));
}

RobotModel RobotModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open robot model " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("robot model " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

json RobotModel::to_json() const {
  json doc;
  doc["joints"] = json::array();
  for (const auto& j : joints_) {
    json e = transform_to(j.origin);
    e["axis"] = vec_to(j.axis);
    doc["joints"].push_back(e);
  }
  doc["flange"] = transform_to(flange_);
  doc["limits"] = {{"lower", vec_to(limits_.lower)},
                   {"upper", vec_to(limits_.upper)},
                   {"vel", vec_to(limits_.velocity)},
                   {"acc", vec_to(limits_.acceleration)}};
  doc["spheres"] = json::array();
  for (const auto& s : spheres_) {
    doc["spheres"].push_back({{"link", s.link}, {"center", vec_to(s.center)}, {"radius", s.radius}});
  }
  return doc;
}

Vec7 RobotModel::clamp_to_limits(const Vec7& q) const {
  return q.cwiseMax(limits_.lower).cwiseMin(limits_.upper);
}

bool RobotModel::within_limits(const Vec7& q) const {
  return (q.array() >= limits_.lower.array()).all() && (q.array() <= limits_.upper.array()).all();
}

ChainPose forward_kinematics(const RobotModel& model, const Vec7& q) {
  if (!finite(q)) throw InputError("forward_kinematics: non-finite joint vector");
  ChainPose pose;
  pose.links[0] = Transform::Identity();
  for (int j = 0; j < kNumJoints; ++j) {
    const JointSpec& spec = model.joints()[j];
    pose.links[j + 1] =
        pose.links[j] * spec.origin * Eigen::AngleAxisd(q[j], spec.axis);
  }
  pose.end_effector = pose.links[kNumJoints] * model.flange();
  return pose;
}

PosedRobot pose_robot(const RobotModel& model, const Vec7& q) {
  PosedRobot out{forward_kinematics(model, q), {}};
  out.centers.reserve(model.spheres().size());
  for (const auto& s : model.spheres()) out.centers.push_back(out.pose.links[s.link] * s.center);
  return out;
}

Jacobian3x7 point_jacobian(const ChainPose& pose, const RobotModel& model, const SurfacePoint& p) {
  if (p.link < 0 || p.link >= kNumLinks) {
    throw InputError("point_jacobian: link index out of range");
  }
  Jacobian3x7 jac = Jacobian3x7::Zero();
  // Joint j (0-based) drives link j + 1; its world frame is that link's frame.
  for (int j = 0; j < p.link; ++j) {
    const Transform& frame = pose.links[j + 1];
    const Vec3 axis = frame.linear() * model.joints()[j].axis;
    jac.col(j) = axis.cross(p.position - frame.translation());
  }
  return jac;
}

Jacobian3x7 point_jacobian(const RobotModel& model, const Vec7& q, const SurfacePoint& p) {
  return point_jacobian(forward_kinematics(model, q), model, p);
}

SurfacePoint closest_surface_point(const PosedRobot& posed, const RobotModel& model,
                                   const Vec3& x_obs, double* signed_distance) {
  const auto& spheres = model.spheres();
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < spheres.size(); ++i) {
    const double d = (x_obs - posed.centers[i]).norm() - spheres[i].radius;
    if (d < best) {
      best = d;
      best_i = i;
    }
  }
  const Vec3& c = posed.centers[best_i];
  const double r = spheres[best_i].radius;
  const Vec3 offset = x_obs - c;
  const double len = offset.norm();
  SurfacePoint out;
  out.position = len < 1e-12 ? Vec3(c + r * Vec3::UnitZ()) : Vec3(c + (r / len) * offset);
  out.link = spheres[best_i].link;
  out.sphere = static_cast<int>(best_i);
  if (signed_distance != nullptr) *signed_distance = best;
  return out;
}

SurfacePoint closest_surface_point(const RobotModel& model, const Vec7& q, const Vec3& x_obs) {
  return closest_surface_point(pose_robot(model, q), model, x_obs);
}

RobotCloudSampler::RobotCloudSampler(const RobotModel& model, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InputError("robot_point_cloud: n must be >= 1");
  const auto& spheres = model.spheres();
  std::vector<double> cumulative;
  double total = 0.0;
  for (const auto& s : spheres) {
    total += 4.0 * std::numbers::pi * s.radius * s.radius;
    cumulative.push_back(total);
  }
  Rng rng(seed);
  sphere_.reserve(n);
  direction_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const int k = static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                            cumulative.size() - 1));
    sphere_.push_back(k);
    direction_.push_back(rng.unit_vector());
    radius_.push_back(spheres[k].radius);
  }
}

PointCloud RobotCloudSampler::sample(const PosedRobot& posed) const {
  PointCloud cloud;
  cloud.points.reserve(sphere_.size());
  for (std::size_t i = 0; i < sphere_.size(); ++i) {
    cloud.points.push_back(posed.centers[sphere_[i]] + radius_[i] * direction_[i]);
  }
  return cloud;
}

PointCloud robot_point_cloud(const RobotModel& model, const Vec7& q, std::size_t n,
                             std::uint64_t seed) {
  return RobotCloudSampler(model, n, seed).sample(pose_robot(model, q));
}

}  // namespace reflex
