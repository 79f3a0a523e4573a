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

#include "reflex/scene.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "reflex/rng.hpp"

namespace reflex {

namespace {

using nlohmann::json;

json vec_json(const auto& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vec3 vec3_of(const json& j) {
  if (!j.is_array() || j.size() != 3) throw InputError("scene: expected a 3-array");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Vec7 vec7_of(const json& j) {
  if (!j.is_array() || j.size() != 7) throw InputError("scene: expected a 7-array");
  Vec7 v;
  for (int i = 0; i < 7; ++i) v[i] = j[i].get<double>();
  return v;
}

// JSON has no infinity; an open-ended interval is written as null.
json time_json(double t) { return std::isinf(t) ? json(nullptr) : json(t); }
double time_of(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

json shape_json(const Shape& s) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Box>) {
          return {{"type", "box"}, {"center", vec_json(v.center)},
                  {"half_extents", vec_json(v.half_extents)}};
        } else {
          return {{"type", "sphere"}, {"center", vec_json(v.center)}, {"radius", v.radius}};
        }
      },
      s);
}

Shape shape_of(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "box") {
    Box b{vec3_of(j.at("center")), vec3_of(j.at("half_extents"))};
    if ((b.half_extents.array() <= 0.0).any()) throw InputError("scene: box extents must be > 0");
    return b;
  }
  if (type == "sphere") {
    Ball b{vec3_of(j.at("center")), j.at("radius").get<double>()};
    if (!(b.radius > 0.0)) throw InputError("scene: sphere radius must be > 0");
    return b;
  }
  throw InputError("scene: unknown primitive type '" + type + "'");
}

json motion_json(const MotionScript& m) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, AppearScript>) {
          return {{"kind", "appear"}, {"t_appear", v.t_appear}, {"position", vec_json(v.position)}};
        } else if constexpr (std::is_same_v<T, WaypointScript>) {
          return {{"kind", "random_waypoints"},     {"speed", v.speed},
                  {"region_lo", vec_json(v.region_lo)}, {"region_hi", vec_json(v.region_hi)},
                  {"resample_seed", v.resample_seed},   {"start", vec_json(v.start)}};
        } else if constexpr (std::is_same_v<T, GoalBlockScript>) {
          return {{"kind", "goal_block"},
                  {"t_block", v.t_block},
                  {"t_unblock", time_json(v.t_unblock)},
                  {"position", vec_json(v.position)}};
        } else {
          return {{"kind", "post_goal_approach"}, {"speed", v.speed}, {"delay", v.delay},
                  {"start", vec_json(v.start)},   {"target", vec_json(v.target)}};
        }
      },
      m);
}

MotionScript motion_of(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "appear") return AppearScript{j.at("t_appear").get<double>(), vec3_of(j.at("position"))};
  if (kind == "random_waypoints") {
    return WaypointScript{j.at("speed").get<double>(), vec3_of(j.at("region_lo")),
                          vec3_of(j.at("region_hi")), j.at("resample_seed").get<std::uint64_t>(),
                          vec3_of(j.at("start"))};
  }
  if (kind == "goal_block") {
    return GoalBlockScript{j.at("t_block").get<double>(), time_of(j.at("t_unblock")),
                           vec3_of(j.at("position"))};
  }
  if (kind == "post_goal_approach") {
    return ApproachScript{j.at("speed").get<double>(), j.at("delay").get<double>(),
                          vec3_of(j.at("start")), vec3_of(j.at("target"))};
  }
  throw InputError("scene: unknown motion kind '" + kind + "'");
}

}  // namespace

std::string_view family_name(Family f) {
  switch (f) {
    case Family::kSE: return "se";
    case Family::kSAO: return "sao";
    case Family::kFDO: return "fdo";
    case Family::kGB: return "gb";
    case Family::kDGB: return "dgb";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Family f : kAllFamilies) {
    if (family_name(f) == lower) return f;
  }
  throw InputError("unknown family '" + std::string(name) + "'");
}

double surface_area(const Shape& s) {
  if (const auto* b = std::get_if<Box>(&s)) {
    const Vec3 e = 2.0 * b->half_extents;
    return 2.0 * (e.x() * e.y() + e.y() * e.z() + e.x() * e.z());
  }
  const auto& ball = std::get<Ball>(s);
  return 4.0 * std::numbers::pi * ball.radius * ball.radius;
}

Vec3 shape_center(const Shape& s) {
  return std::visit([](const auto& v) { return v.center; }, s);
}

Shape moved_to(const Shape& s, const Vec3& center) {
  Shape out = s;
  std::visit([&](auto& v) { v.center = center; }, out);
  return out;
}

double signed_distance(const Shape& s, const Vec3& p) {
  if (const auto* b = std::get_if<Box>(&s)) {
    const Vec3 q = (p - b->center).cwiseAbs() - b->half_extents;
    const double outside = q.cwiseMax(0.0).norm();
    const double inside = std::min(q.maxCoeff(), 0.0);
    return outside + inside;
  }
  const auto& ball = std::get<Ball>(s);
  return (p - ball.center).norm() - ball.radius;
}

double sphere_clearance(const Shape& s, const Vec3& c, double r) {
  return signed_distance(s, c) - r;
}

void SceneSpec::validate() const {
  for (const auto& d : dynamic_obstacles) {
    std::visit(
        [](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, AppearScript>) {
            if (m.t_appear < 0.0) throw InputError("scene: negative t_appear");
          } else if constexpr (std::is_same_v<T, WaypointScript>) {
            if (m.speed < 0.0) throw InputError("scene: negative waypoint speed");
            if ((m.region_hi.array() < m.region_lo.array()).any()) {
              throw InputError("scene: inverted waypoint region");
            }
          } else if constexpr (std::is_same_v<T, GoalBlockScript>) {
            if (m.t_block < 0.0 || m.t_unblock < m.t_block) {
              throw InputError("scene: bad goal_block interval");
            }
          } else {
            if (m.speed < 0.0 || m.delay < 0.0) throw InputError("scene: bad approach script");
          }
        },
        d.motion);
  }
  if (!q_start.allFinite() || !q_g.allFinite()) throw InputError("scene: non-finite joints");
}

json SceneSpec::to_json() const {
  json j;
  j["family"] = family_name(family);
  j["seed"] = seed;
  j["static_obstacles"] = json::array();
  for (const auto& s : static_obstacles) j["static_obstacles"].push_back(shape_json(s));
  j["dynamic_obstacles"] = json::array();
  for (const auto& d : dynamic_obstacles) {
    j["dynamic_obstacles"].push_back({{"shape", shape_json(d.shape)}, {"motion", motion_json(d.motion)}});
  }
  j["q_start"] = vec_json(q_start);
  j["q_g"] = vec_json(q_g);
  j["goal_pose"] = {{"position", vec_json(goal_position)},
                    {"quat_wxyz",
                     {goal_orientation.w(), goal_orientation.x(), goal_orientation.y(),
                      goal_orientation.z()}}};
  return j;
}

SceneSpec SceneSpec::from_json(const json& j) {
  SceneSpec s;
  try {
    s.family = parse_family(j.at("family").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& o : j.at("static_obstacles")) s.static_obstacles.push_back(shape_of(o));
    for (const auto& d : j.at("dynamic_obstacles")) {
      s.dynamic_obstacles.push_back({shape_of(d.at("shape")), motion_of(d.at("motion"))});
    }
    s.q_start = vec7_of(j.at("q_start"));
    s.q_g = vec7_of(j.at("q_g"));
    const json& pose = j.at("goal_pose");
    s.goal_position = vec3_of(pose.at("position"));
    const json& qj = pose.at("quat_wxyz");
    if (!qj.is_array() || qj.size() != 4) throw InputError("scene: quat_wxyz must be a 4-array");
    s.goal_orientation = Eigen::Quaterniond(qj[0].get<double>(), qj[1].get<double>(),
                                            qj[2].get<double>(), qj[3].get<double>());
  } catch (const json::exception& e) {
    throw InputError(std::string("scene: ") + e.what());
  }
  s.validate();
  return s;
}

// Field-for-field, exact doubles.
bool operator==(const SceneSpec& a, const SceneSpec& b) { return a.to_json() == b.to_json(); }

Vec3 position_on_track(const std::vector<Vec3>& points, const std::vector<double>& times,
                       double t) {
  if (t <= times.front()) return points.front();
  if (t >= times.back()) return points.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - times.begin());
  const double span = times[k] - times[k - 1];
  const double s = span > 0.0 ? (t - times[k - 1]) / span : 1.0;
  return points[k - 1] + s * (points[k] - points[k - 1]);
}

SceneWorld::SceneWorld(const SceneSpec& spec, double horizon_s) : spec_(spec) {
  for (const auto& d : spec_.dynamic_obstacles) {
    const auto* w = std::get_if<WaypointScript>(&d.motion);
    if (w == nullptr) {
      dynamic_.emplace_back();
      continue;
    }
    Track track;
    track.points.push_back(w->start);
    track.times.push_back(0.0);
    Rng rng(w->resample_seed);
    while (track.times.back() <= horizon_s && w->speed > 0.0) {
      Vec3 next;
      for (int a = 0; a < 3; ++a) next[a] = rng.uniform(w->region_lo[a], w->region_hi[a]);
      const double len = (next - track.points.back()).norm();
      if (!(len > 0.0)) {
        // A single-point region: park there for the rest of the episode.
        track.times.push_back(horizon_s + 1.0);
        track.points.push_back(next);
        break;
      }
      track.times.push_back(track.times.back() + len / w->speed);
      track.points.push_back(next);
    }
    dynamic_.push_back(std::move(track));
  }
}

void SceneWorld::notify_reached(double t) {
  if (!reached_at_) reached_at_ = t;
}

SceneWorld::Placement SceneWorld::dynamic_at(std::size_t i, double t) const {
  const DynamicObstacle& d = spec_.dynamic_obstacles[i];
  return std::visit(
      [&](const auto& m) -> Placement {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, AppearScript>) {
          return {t >= m.t_appear, moved_to(d.shape, m.position)};
        } else if constexpr (std::is_same_v<T, WaypointScript>) {
          const Track& tr = *dynamic_[i];
          return {true, moved_to(d.shape, position_on_track(tr.points, tr.times, t))};
        } else if constexpr (std::is_same_v<T, GoalBlockScript>) {
          return {t >= m.t_block && t < m.t_unblock, moved_to(d.shape, m.position)};
        } else {
          if (!reached_at_ || m.speed <= 0.0) return {false, moved_to(d.shape, m.start)};
          const double leg = (m.target - m.start).norm() / m.speed;
          const double s = t - (*reached_at_ + m.delay);
          if (s < 0.0 || s > 2.0 * leg) return {false, moved_to(d.shape, m.start)};
          const double frac = leg > 0.0 ? (s <= leg ? s / leg : (2.0 * leg - s) / leg) : 0.0;
          return {true, moved_to(d.shape, m.start + frac * (m.target - m.start))};
        }
      },
      d.motion);
}

std::vector<SceneWorld::Placement> SceneWorld::at(double t) const {
  std::vector<Placement> out;
  out.reserve(primitive_count());
  for (const auto& s : spec_.static_obstacles) out.push_back({true, s});
  for (std::size_t i = 0; i < dynamic_.size(); ++i) out.push_back(dynamic_at(i, t));
  return out;
}

std::vector<Shape> SceneWorld::active_shapes(double t) const {
  std::vector<Shape> out;
  for (auto& p : at(t)) {
    if (p.active) out.push_back(std::move(p.shape));
  }
  return out;
}

}  // namespace reflex
