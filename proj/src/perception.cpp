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

#include "reflex/perception.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace reflex {

namespace {

constexpr std::size_t kLeafSize = 8;
constexpr std::size_t kLinearScanLimit = 32;

}  // namespace

// Implicit layout: node i covers a contiguous range; children are 2i+1 and
// 2i+2 and split that range at its midpoint.
KdTree::KdTree(const PointCloud& cloud) {
  if (cloud.empty()) throw InputError("build_tree: empty cloud");
  std::vector<Entry> entries(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) entries[i] = {cloud.points[i], i};
  std::size_t leaves = 1;
  while (leaves * kLeafSize < entries.size()) leaves *= 2;
  nodes_.assign(2 * leaves, Node{-1, 0.0});
  build(entries, 0, 0, entries.size());
  points_.resize(entries.size());
  source_index_.resize(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    points_[i] = entries[i].point;
    source_index_[i] = entries[i].index;
  }
}

// Points travel with their source index so partitioning stays contiguous.
void KdTree::build(std::vector<Entry>& entries, std::size_t node, std::size_t lo,
                   std::size_t hi) {
  if (hi - lo <= kLeafSize || 2 * node + 2 >= nodes_.size()) {
    nodes_[node].axis = -1;
    return;
  }
  const auto first = entries.begin();
  Vec3 mn = entries[lo].point, mx = mn;
  for (std::size_t i = lo + 1; i < hi; ++i) {
    mn = mn.cwiseMin(entries[i].point);
    mx = mx.cwiseMax(entries[i].point);
  }
  int axis = 0;
  (mx - mn).maxCoeff(&axis);
  const std::size_t mid = lo + (hi - lo) / 2;
  std::nth_element(first + lo, first + mid, first + hi, [axis](const Entry& a, const Entry& b) {
    const double pa = a.point[axis], pb = b.point[axis];
    return pa < pb || (pa == pb && a.index < b.index);
  });
  nodes_[node] = {axis, entries[mid].point[axis]};
  build(entries, 2 * node + 1, lo, mid);
  build(entries, 2 * node + 2, mid, hi);
}

void KdTree::nearest_in(std::size_t node, std::size_t lo, std::size_t hi, const Vec3& q,
                        Neighbor& best) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double d = (points_[i] - q).squaredNorm();
      if (d < best.distance || (d == best.distance && source_index_[i] < best.index)) {
        best = {source_index_[i], d};
      }
    }
    return;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  const double diff = q[n.axis] - n.split;
  const bool left_first = diff < 0.0;
  if (left_first) {
    nearest_in(2 * node + 1, lo, mid, q, best);
    if (diff * diff <= best.distance) nearest_in(2 * node + 2, mid, hi, q, best);
  } else {
    nearest_in(2 * node + 2, mid, hi, q, best);
    if (diff * diff <= best.distance) nearest_in(2 * node + 1, lo, mid, q, best);
  }
}

KdTree::Neighbor KdTree::nearest(const Vec3& query) const {
  Neighbor best{0, std::numeric_limits<double>::infinity()};
  nearest_in(0, 0, points_.size(), query, best);
  best.distance = std::sqrt(best.distance);
  return best;
}

bool KdTree::any_in(std::size_t node, std::size_t lo, std::size_t hi, const Vec3& q,
                    double radius_sq) const {
  const Node& n = nodes_[node];
  if (n.axis < 0) {
    for (std::size_t i = lo; i < hi; ++i) {
      if ((points_[i] - q).squaredNorm() <= radius_sq) return true;
    }
    return false;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  const double diff = q[n.axis] - n.split;
  const bool near_left = diff < 0.0;
  if (near_left ? any_in(2 * node + 1, lo, mid, q, radius_sq)
                : any_in(2 * node + 2, mid, hi, q, radius_sq)) {
    return true;
  }
  if (diff * diff > radius_sq) return false;
  return near_left ? any_in(2 * node + 2, mid, hi, q, radius_sq)
                   : any_in(2 * node + 1, lo, mid, q, radius_sq);
}

bool KdTree::any_within(const Vec3& query, double radius) const {
  return any_in(0, 0, points_.size(), query, radius * radius);
}

DynamicPointSet extract_dynamic_points(const KdTree& prev, const PointCloud& curr,
                                       double tau_dyn) {
  if (curr.empty()) throw InputError("extract_dynamic_points: empty current cloud");
  if (!(tau_dyn > 0.0)) throw InputError("extract_dynamic_points: tau_dyn must be positive");
  DynamicPointSet out;
  for (std::size_t i = 0; i < curr.size(); ++i) {
    // Nearest distance > tau  <=>  nothing within tau.
    if (!prev.any_within(curr.points[i], tau_dyn)) {
      out.points.push_back(curr.points[i]);
      out.indices.push_back(i);
    }
  }
  return out;
}

// Same answer as the tree overload. Two exact shortcuts keep the common case
// cheap: a point within tau of its same-index predecessor already has a
// neighbor within tau, and a handful of leftover candidates is faster to
// scan linearly than to build a tree for.
DynamicPointSet extract_dynamic_points(const PointCloud& prev, const PointCloud& curr,
                                       double tau_dyn) {
  if (prev.empty()) throw InputError("extract_dynamic_points: empty previous cloud");
  if (curr.empty()) throw InputError("extract_dynamic_points: empty current cloud");
  if (!(tau_dyn > 0.0)) throw InputError("extract_dynamic_points: tau_dyn must be positive");
  const double tau_sq = tau_dyn * tau_dyn;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < curr.size(); ++i) {
    if (i < prev.size() && (curr.points[i] - prev.points[i]).squaredNorm() <= tau_sq) continue;
    candidates.push_back(i);
  }
  DynamicPointSet out;
  if (candidates.size() <= kLinearScanLimit) {
    for (const std::size_t i : candidates) {
      const Vec3& x = curr.points[i];
      const bool near = std::any_of(prev.points.begin(), prev.points.end(),
                                    [&](const Vec3& y) { return (x - y).squaredNorm() <= tau_sq; });
      if (!near) {
        out.points.push_back(x);
        out.indices.push_back(i);
      }
    }
    return out;
  }
  const KdTree tree(prev);
  for (const std::size_t i : candidates) {
    if (!tree.any_within(curr.points[i], tau_dyn)) {
      out.points.push_back(curr.points[i]);
      out.indices.push_back(i);
    }
  }
  return out;
}

DynamicPointSet extract_dynamic_points(const std::optional<PointCloud>& prev,
                                       const PointCloud& curr, double tau_dyn) {
  if (!prev) {
    DynamicPointSet out;
    out.status = DynamicPointSet::Status::kNoPreviousFrame;
    return out;
  }
  return extract_dynamic_points(*prev, curr, tau_dyn);
}

std::optional<DynamicClosest> closest_dynamic_to_robot(const DynamicPointSet& dyn,
                                                       const PosedRobot& posed,
                                                       const RobotModel& model) {
  if (dyn.empty()) return std::nullopt;
  const auto& spheres = model.spheres();
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_point = 0;
  for (std::size_t i = 0; i < dyn.points.size(); ++i) {
    for (std::size_t s = 0; s < spheres.size(); ++s) {
      const double d = (dyn.points[i] - posed.centers[s]).norm() - spheres[s].radius;
      if (d < best) {
        best = d;
        best_point = i;
      }
    }
  }
  DynamicClosest out{dyn.points[best_point], {}, 0.0};
  out.x_p = closest_surface_point(posed, model, out.x_obs, &out.distance);
  return out;
}

std::optional<DynamicClosest> closest_dynamic_to_robot(const DynamicPointSet& dyn,
                                                       const RobotModel& model, const Vec7& q) {
  return closest_dynamic_to_robot(dyn, pose_robot(model, q), model);
}

}  // namespace reflex
