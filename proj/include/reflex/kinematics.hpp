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

#include <array>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "reflex/point_cloud.hpp"
#include "reflex/types.hpp"

namespace reflex {

/// One revolute joint: fixed parent-to-joint transform followed by a
/// rotation about `axis` (joint frame).
struct JointSpec {
  Transform origin = Transform::Identity();
  Vec3 axis = Vec3::UnitZ();
};

struct JointLimits {
  Vec7 lower;
  Vec7 upper;
  Vec7 velocity;
  Vec7 acceleration;
};

struct CollisionSphere {
  int link = 0;  // 0..7
  Vec3 center = Vec3::Zero();  // link frame
  double radius = 0.0;
};

/// Seven-joint revolute chain with a sphere-approximated surface.
/// Immutable after construction; the constructor enforces all invariants.
class RobotModel {
 public:
  RobotModel(std::array<JointSpec, kNumJoints> joints, Transform flange, JointLimits limits,
             std::vector<CollisionSphere> spheres);

  static RobotModel from_json(const nlohmann::json& doc);
  static RobotModel load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  const std::array<JointSpec, kNumJoints>& joints() const { return joints_; }
  const Transform& flange() const { return flange_; }
  const JointLimits& limits() const { return limits_; }
  const std::vector<CollisionSphere>& spheres() const { return spheres_; }

  Vec7 clamp_to_limits(const Vec7& q) const;
  bool within_limits(const Vec7& q) const;

 private:
  std::array<JointSpec, kNumJoints> joints_;
  Transform flange_;
  JointLimits limits_;
  std::vector<CollisionSphere> spheres_;
};

struct JointState {
  Vec7 q = Vec7::Zero();
  Vec7 qdot = Vec7::Zero();
};

/// A point on the surface of one collision sphere, in world frame.
struct SurfacePoint {
  Vec3 position = Vec3::Zero();
  int link = 0;
  int sphere = 0;
};

/// World-frame transforms of every link frame plus the end effector.
struct ChainPose {
  std::array<Transform, kNumLinks> links;
  Transform end_effector;
};

ChainPose forward_kinematics(const RobotModel& model, const Vec7& q);

/// FK together with the world centers of every collision sphere. Most
/// per-tick queries want both, so they are computed once.
struct PosedRobot {
  ChainPose pose;
  std::vector<Vec3> centers;
};

PosedRobot pose_robot(const RobotModel& model, const Vec7& q);

/// Column j is axis_j x (p - origin_j) for joints at or proximal to
/// p.link, zero beyond it.
Jacobian3x7 point_jacobian(const RobotModel& model, const Vec7& q, const SurfacePoint& p);
Jacobian3x7 point_jacobian(const ChainPose& pose, const RobotModel& model, const SurfacePoint& p);

/// Closest point on the union of collision spheres, ranked by signed
/// distance |x - c| - r. A query exactly at a sphere center resolves to the
/// +z pole of that sphere.
SurfacePoint closest_surface_point(const RobotModel& model, const Vec7& q, const Vec3& x_obs);
SurfacePoint closest_surface_point(const PosedRobot& posed, const RobotModel& model,
                                   const Vec3& x_obs, double* signed_distance = nullptr);

/// Area-weighted surface samples of the sphere model at configuration q.
PointCloud robot_point_cloud(const RobotModel& model, const Vec7& q, std::size_t n,
                             std::uint64_t seed);

/// Precomputed sphere/direction assignments so the per-tick robot cloud is
/// just a transform of fixed samples.
class RobotCloudSampler {
 public:
  RobotCloudSampler(const RobotModel& model, std::size_t n, std::uint64_t seed);
  PointCloud sample(const PosedRobot& posed) const;

 private:
  std::vector<int> sphere_;
  std::vector<Vec3> direction_;
  std::vector<double> radius_;
};

}  // namespace reflex
