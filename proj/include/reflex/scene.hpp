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

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "reflex/types.hpp"

namespace reflex {

enum class Family { kSE, kSAO, kFDO, kGB, kDGB };

inline constexpr Family kAllFamilies[] = {Family::kSE, Family::kSAO, Family::kFDO, Family::kGB,
                                          Family::kDGB};

std::string_view family_name(Family f);  // "se", "sao", ...
Family parse_family(std::string_view name);

/// Axis-aligned box.
struct Box {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Constant(0.05);
};

struct Ball {
  Vec3 center = Vec3::Zero();
  double radius = 0.05;
};

using Shape = std::variant<Box, Ball>;

double surface_area(const Shape& s);
Vec3 shape_center(const Shape& s);
Shape moved_to(const Shape& s, const Vec3& center);
/// Negative inside, zero on the surface.
double signed_distance(const Shape& s, const Vec3& p);
/// Signed distance between a ball (c, r) and the shape.
double sphere_clearance(const Shape& s, const Vec3& c, double r);

/// Inactive before t_appear, then parked at `position`.
struct AppearScript {
  double t_appear = 0.0;
  Vec3 position = Vec3::Zero();
};

/// Piecewise-linear wandering through waypoints drawn uniformly from the
/// region, starting at `start`.
struct WaypointScript {
  double speed = 0.5;
  Vec3 region_lo = Vec3::Zero();
  Vec3 region_hi = Vec3::Zero();
  std::uint64_t resample_seed = 0;
  Vec3 start = Vec3::Zero();
};

/// Parked at `position` during [t_block, t_unblock).
struct GoalBlockScript {
  double t_block = 0.0;
  double t_unblock = std::numeric_limits<double>::infinity();
  Vec3 position = Vec3::Zero();
};

/// Dormant until the robot first reaches its goal. `delay` seconds later it
/// travels start -> target at `speed`, returns to start, and vanishes.
struct ApproachScript {
  double speed = 0.5;
  double delay = 0.0;
  Vec3 start = Vec3::Zero();
  Vec3 target = Vec3::Zero();
};

using MotionScript = std::variant<AppearScript, WaypointScript, GoalBlockScript, ApproachScript>;

struct DynamicObstacle {
  Shape shape;
  MotionScript motion;
};

struct SceneSpec {
  Family family = Family::kSE;
  std::uint64_t seed = 0;
  std::vector<Shape> static_obstacles;
  std::vector<DynamicObstacle> dynamic_obstacles;
  Vec7 q_start = Vec7::Zero();
  Vec7 q_g = Vec7::Zero();
  Vec3 goal_position = Vec3::Zero();
  Eigen::Quaterniond goal_orientation = Eigen::Quaterniond::Identity();

  /// Throws InputError when scripts carry negative speeds or times, or an
  /// inverted region.
  void validate() const;

  nlohmann::json to_json() const;
  static SceneSpec from_json(const nlohmann::json& j);
};

bool operator==(const SceneSpec& a, const SceneSpec& b);

/// The scene's obstacles as a function of time. Only the approach script
/// depends on anything but time, via notify_reached().
class SceneWorld {
 public:
  SceneWorld(const SceneSpec& spec, double horizon_s);

  /// Records the first reach; later calls are ignored.
  void notify_reached(double t);

  struct Placement {
    bool active = false;
    Shape shape;
  };

  /// Static obstacles first, then dynamic ones, in spec order.
  std::vector<Placement> at(double t) const;

  /// Only the active shapes at time t.
  std::vector<Shape> active_shapes(double t) const;

  std::size_t primitive_count() const { return spec_.static_obstacles.size() + dynamic_.size(); }
  const SceneSpec& spec() const { return spec_; }

 private:
  struct Track {
    std::vector<Vec3> points;
    std::vector<double> times;
  };

  Placement dynamic_at(std::size_t i, double t) const;

  SceneSpec spec_;
  std::vector<std::optional<Track>> dynamic_;
  std::optional<double> reached_at_;
};

Vec3 position_on_track(const std::vector<Vec3>& points, const std::vector<double>& times, double t);

}  // namespace reflex
