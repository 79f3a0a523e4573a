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

#include <optional>
#include <vector>

#include "reflex/kinematics.hpp"
#include "reflex/point_cloud.hpp"

namespace reflex {

/// Balanced 3-d tree over a cloud snapshot. Queries are exact.
class KdTree {
 public:
  explicit KdTree(const PointCloud& cloud);

  struct Neighbor {
    std::size_t index;  // into the source cloud
    double distance;
  };

  Neighbor nearest(const Vec3& query) const;

  /// True when some point lies within `radius` (inclusive). Stops at the
  /// first hit, so it is much cheaper than nearest() for membership tests.
  bool any_within(const Vec3& query, double radius) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    int axis;  // -1 for a leaf bucket
    double split;
  };

  struct Entry {
    Vec3 point;
    std::size_t index;
  };

  void build(std::vector<Entry>& entries, std::size_t node, std::size_t lo, std::size_t hi);
  void nearest_in(std::size_t node, std::size_t lo, std::size_t hi, const Vec3& q,
                  Neighbor& best) const;
  bool any_in(std::size_t node, std::size_t lo, std::size_t hi, const Vec3& q,
              double radius_sq) const;

  std::vector<Vec3> points_;
  std::vector<std::size_t> source_index_;
  std::vector<Node> nodes_;
};

struct DynamicPointSet {
  enum class Status {
    kClassified,
    kNoPreviousFrame,  // first frame of an episode; empty by contract
  };

  Status status = Status::kClassified;
  std::vector<Vec3> points;
  std::vector<std::size_t> indices;  // into the current cloud

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
};

/// Points of `curr` whose nearest neighbor in the previous frame is farther
/// than `tau_dyn`.
DynamicPointSet extract_dynamic_points(const KdTree& prev, const PointCloud& curr, double tau_dyn);
DynamicPointSet extract_dynamic_points(const PointCloud& prev, const PointCloud& curr,
                                       double tau_dyn);
DynamicPointSet extract_dynamic_points(const std::optional<PointCloud>& prev,
                                       const PointCloud& curr, double tau_dyn);

struct DynamicClosest {
  Vec3 x_obs;
  SurfacePoint x_p;
  double distance;  // signed: negative when x_obs is inside a robot sphere
};

std::optional<DynamicClosest> closest_dynamic_to_robot(const DynamicPointSet& dyn,
                                                       const RobotModel& model, const Vec7& q);
std::optional<DynamicClosest> closest_dynamic_to_robot(const DynamicPointSet& dyn,
                                                       const PosedRobot& posed,
                                                       const RobotModel& model);

}  // namespace reflex
