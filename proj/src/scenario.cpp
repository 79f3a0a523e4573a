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

#include <algorithm>
#include <cmath>

#include "reflex/simbench.hpp"

namespace reflex {

namespace {

constexpr int kMaxResamples = 100;

const Vec7 kReady = (Vec7() << 0.0, -0.785, 0.0, -2.356, 0.0, 1.571, 0.785).finished();
const Vec7 kSpread = (Vec7() << 1.4, 0.6, 0.7, 0.7, 1.0, 0.7, 1.0).finished();

double min_clearance(const RobotModel& model, const Vec7& q, std::span<const Shape> shapes) {
  if (shapes.empty()) return std::numeric_limits<double>::infinity();
  return check_collision(model, pose_robot(model, q), shapes).clearance;
}

// Reasonable tabletop configuration: every sphere past the shoulder stays
// above the ground plane and the end effector is out in front of the base.
// The base spheres straddle z = 0 by construction, so they are skipped.
bool plausible(const RobotModel& model, const Vec7& q) {
  const PosedRobot posed = pose_robot(model, q);
  for (std::size_t i = 0; i < posed.centers.size(); ++i) {
    const CollisionSphere& s = model.spheres()[i];
    if (s.link >= 2 && posed.centers[i].z() - s.radius < 0.0) return false;
  }
  const Vec3 ee = posed.pose.end_effector.translation();
  return ee.z() > 0.1 && ee.head<2>().norm() > 0.3;
}

Vec7 sample_configuration(const RobotModel& model, Rng& rng) {
  const JointLimits& lim = model.limits();
  for (;;) {
    Vec7 q;
    for (int j = 0; j < kNumJoints; ++j) {
      q[j] = std::clamp(kReady[j] + rng.uniform(-kSpread[j], kSpread[j]), lim.lower[j] + 0.05,
                        lim.upper[j] - 0.05);
    }
    if (plausible(model, q)) return q;
  }
}

struct Endpoints {
  Vec7 start;
  Vec7 goal;
};

Endpoints sample_endpoints(const RobotModel& model, Rng& rng) {
  for (;;) {
    const Vec7 a = sample_configuration(model, rng);
    const Vec7 b = sample_configuration(model, rng);
    const double travel = (forward_kinematics(model, a).end_effector.translation() -
                           forward_kinematics(model, b).end_effector.translation())
                              .norm();
    if (travel < 0.3 || travel > 0.8) continue;
    // Every intermediate configuration should stay plausible as well.
    bool ok = true;
    for (int s = 1; s < 16 && ok; ++s) ok = plausible(model, a + (b - a) * (s / 16.0));
    if (ok) return {a, b};
  }
}

Shape random_static(Rng& rng, const std::vector<Vec3>& path_points) {
  Vec3 center;
  if (rng.uniform() < 0.5) {
    const Vec3& anchor = path_points[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(path_points.size()) - 1))];
    center = anchor + rng.uniform(0.12, 0.35) * rng.unit_vector();
  } else {
    center = {rng.uniform(-0.3, 0.9), rng.uniform(-0.8, 0.8), rng.uniform(0.0, 1.0)};
  }
  Box box;
  box.center = center;
  if (rng.uniform() < 0.35) {  // shelf-like slab
    box.half_extents = {rng.uniform(0.1, 0.3), rng.uniform(0.1, 0.3), rng.uniform(0.01, 0.02)};
  } else {
    box.half_extents = {rng.uniform(0.03, 0.15), rng.uniform(0.03, 0.15), rng.uniform(0.03, 0.15)};
  }
  return box;
}

// Sphere centers of the robot along the straight segment, links 3 and up.
std::vector<Vec3> swept_points(const RobotModel& model, const Vec7& a, const Vec7& b) {
  std::vector<Vec3> out;
  for (int s = 0; s <= 16; ++s) {
    const PosedRobot posed = pose_robot(model, a + (b - a) * (s / 16.0));
    for (std::size_t i = 0; i < posed.centers.size(); ++i) {
      if (model.spheres()[i].link >= 3) out.push_back(posed.centers[i]);
    }
  }
  return out;
}

void place_statics(SceneSpec& spec, int count, const DifficultyConfig& d, const RobotModel& model,
                   Rng& rng) {
  const auto path = swept_points(model, spec.q_start, spec.q_g);
  for (int placed = 0, tries = 0; placed < count && tries < 200; ++tries) {
    const Shape s = random_static(rng, path);
    const Shape one[] = {s};
    if (!straight_path_clear(model, spec.q_start, spec.q_g, one, d.path_margin)) continue;
    spec.static_obstacles.push_back(s);
    ++placed;
  }
}

bool start_clear(const RobotModel& model, const SceneSpec& spec) {
  return min_clearance(model, spec.q_start, spec.static_obstacles) > 0.0;
}

double nominal_travel_time(const RobotModel& model, const SceneSpec& spec) {
  return (spec.q_g - spec.q_start).lpNorm<Eigen::Infinity>() / model.limits().velocity.minCoeff();
}

std::optional<SceneSpec> attempt(Family family, std::uint64_t seed, int attempt_index,
                                 const DifficultyConfig& d, const RobotModel& model) {
  Rng rng = Rng(seed).split(static_cast<std::uint64_t>(attempt_index));
  SceneSpec spec;
  spec.family = family;
  spec.seed = seed;
  const Endpoints ends = sample_endpoints(model, rng);
  spec.q_start = ends.start;
  spec.q_g = ends.goal;
  const Transform goal = forward_kinematics(model, spec.q_g).end_effector;
  spec.goal_position = goal.translation();
  spec.goal_orientation = Eigen::Quaterniond(goal.linear());

  const bool lite = family == Family::kFDO || family == Family::kDGB;
  const int count = lite ? rng.uniform_int(d.lite_min_obstacles, d.lite_max_obstacles)
                         : rng.uniform_int(d.se_min_obstacles, d.se_max_obstacles);
  place_statics(spec, count, d, model, rng);
  const int minimum = lite ? d.lite_min_obstacles : d.se_min_obstacles;
  if (static_cast<int>(spec.static_obstacles.size()) < minimum) return std::nullopt;
  if (!start_clear(model, spec)) return std::nullopt;
  if (!find_feasible_path(model, spec.q_start, spec.q_g, spec.static_obstacles, seed)) {
    return std::nullopt;
  }

  switch (family) {
    case Family::kSE:
      break;
    case Family::kSAO: {
      // Drop an obstacle onto the end effector's future path.
      const double appear = d.sao_appear_fraction;
      const double where = rng.uniform(appear + 0.25, std::min(0.95, appear + 0.45));
      const Vec3 spot =
          forward_kinematics(model, spec.q_start + (spec.q_g - spec.q_start) * where)
              .end_effector.translation();
      Box box{spot, Vec3(rng.uniform(0.04, 0.08), rng.uniform(0.04, 0.08), rng.uniform(0.04, 0.08))};
      const Shape shape = box;
      const Shape one[] = {shape};
      const Vec7 q_at_appear = spec.q_start + (spec.q_g - spec.q_start) * appear;
      if (min_clearance(model, q_at_appear, one) < 0.05) return std::nullopt;
      spec.dynamic_obstacles.push_back(
          {moved_to(shape, Vec3::Zero()),
           AppearScript{appear * nominal_travel_time(model, spec), spot}});
      break;
    }
    case Family::kFDO: {
      Vec3 lo = Vec3::Constant(1e9), hi = Vec3::Constant(-1e9);
      for (const auto& p : swept_points(model, spec.q_start, spec.q_g)) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
      lo -= Vec3::Constant(d.fdo_region_margin);
      hi += Vec3::Constant(d.fdo_region_margin);
      if (d.fdo_goal_region > 0.0) {
        lo = spec.goal_position - Vec3::Constant(d.fdo_goal_region);
        hi = spec.goal_position + Vec3::Constant(d.fdo_goal_region);
      }
      lo.z() = std::max(lo.z(), 0.05);
      const int spheres = rng.uniform_int(d.fdo_min_spheres, d.fdo_max_spheres);
      for (int i = 0; i < spheres; ++i) {
        const double radius = rng.uniform(d.fdo_min_radius, d.fdo_max_radius);
        WaypointScript script;
        script.speed = rng.uniform(d.fdo_min_speed, d.fdo_max_speed);
        script.region_lo = lo;
        script.region_hi = hi;
        script.resample_seed = rng.next();
        bool found = false;
        for (int k = 0; k < 50 && !found; ++k) {
          for (int a = 0; a < 3; ++a) script.start[a] = rng.uniform(lo[a], hi[a]);
          const Shape probe[] = {Ball{script.start, radius}};
          found = min_clearance(model, spec.q_start, probe) > d.fdo_start_clearance;
        }
        if (!found) return std::nullopt;
        spec.dynamic_obstacles.push_back({Ball{Vec3::Zero(), radius}, script});
      }
      break;
    }
    case Family::kGB: {
      Box blocker{spec.goal_position + 0.03 * rng.uniform() * rng.unit_vector(),
                  Vec3(rng.uniform(0.04, 0.08), rng.uniform(0.04, 0.08), rng.uniform(0.04, 0.08))};
      spec.static_obstacles.push_back(blocker);
      if (!start_clear(model, spec)) return std::nullopt;
      break;
    }
    case Family::kDGB: {
      const double radius = rng.uniform(d.dgb_min_radius, d.dgb_max_radius);
      ApproachScript script;
      script.speed = rng.uniform(d.dgb_min_speed, d.dgb_max_speed);
      script.delay = d.dgb_delay;
      script.target = spec.goal_position + 0.03 * rng.uniform() * rng.unit_vector();
      bool found = false;
      for (int k = 0; k < 50 && !found; ++k) {
        Vec3 dir = rng.unit_vector();
        if (dir.z() < -0.3) continue;
        script.start = script.target + 0.6 * dir;
        const Shape probe[] = {Ball{script.start, radius}};
        found = script.start.z() > 0.05 && min_clearance(model, spec.q_g, probe) > 0.15;
      }
      if (!found) return std::nullopt;
      spec.dynamic_obstacles.push_back({Ball{Vec3::Zero(), radius}, script});
      break;
    }
  }
  return spec;
}

}  // namespace

bool straight_path_clear(const RobotModel& model, const Vec7& a, const Vec7& b,
                         std::span<const Shape> obstacles, double margin, int samples) {
  if (obstacles.empty()) return true;
  for (int s = 0; s <= samples; ++s) {
    if (min_clearance(model, a + (b - a) * (static_cast<double>(s) / samples), obstacles) < margin) {
      return false;
    }
  }
  return true;
}

std::optional<std::vector<Vec7>> find_feasible_path(const RobotModel& model, const Vec7& start,
                                                    const Vec7& goal,
                                                    std::span<const Shape> obstacles,
                                                    std::uint64_t seed, int max_iterations) {
  const auto clear = [&](const Vec7& q) { return min_clearance(model, q, obstacles) >= 0.0; };
  const auto edge_clear = [&](const Vec7& a, const Vec7& b) {
    const int steps =
        std::max(1, static_cast<int>(std::ceil((b - a).lpNorm<Eigen::Infinity>() / 0.05)));
    return straight_path_clear(model, a, b, obstacles, 0.0, steps);
  };
  if (!clear(start) || !clear(goal)) return std::nullopt;
  if (edge_clear(start, goal)) return std::vector<Vec7>{start, goal};

  // RRT-Connect over the joint box.
  struct Node {
    Vec7 q;
    int parent;
  };
  std::vector<Node> trees[2] = {{{start, -1}}, {{goal, -1}}};
  constexpr double kStep = 0.2;
  Rng rng = Rng(seed).split(0xFEA5);
  const JointLimits& lim = model.limits();

  const auto nearest = [](const std::vector<Node>& tree, const Vec7& q) {
    int best = 0;
    double best_d = (tree[0].q - q).squaredNorm();
    for (int i = 1; i < static_cast<int>(tree.size()); ++i) {
      const double d = (tree[i].q - q).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return best;
  };
  // Grows `tree` toward target; returns the index of the last added node
  // and whether it reached the target.
  const auto extend = [&](std::vector<Node>& tree, const Vec7& target, bool connect) {
    int from = nearest(tree, target);
    for (;;) {
      const Vec7 diff = target - tree[from].q;
      const double len = diff.norm();
      const bool arrives = len <= kStep;
      const Vec7 next = arrives ? target : Vec7(tree[from].q + diff * (kStep / len));
      if (!edge_clear(tree[from].q, next)) return std::pair{from, false};
      tree.push_back({next, from});
      from = static_cast<int>(tree.size()) - 1;
      if (arrives) return std::pair{from, true};
      if (!connect) return std::pair{from, false};
    }
  };

  for (int it = 0; it < max_iterations; ++it) {
    auto& a = trees[it % 2];
    auto& b = trees[(it + 1) % 2];
    Vec7 sample;
    for (int j = 0; j < kNumJoints; ++j) sample[j] = rng.uniform(lim.lower[j], lim.upper[j]);
    const auto [added, _] = extend(a, sample, false);
    const auto [joined, reached] = extend(b, a[added].q, true);
    if (!reached) continue;
    std::vector<Vec7> half_a, half_b;
    for (int i = added; i >= 0; i = a[i].parent) half_a.push_back(a[i].q);
    for (int i = joined; i >= 0; i = b[i].parent) half_b.push_back(b[i].q);
    std::reverse(half_a.begin(), half_a.end());
    half_a.insert(half_a.end(), half_b.begin() + 1, half_b.end());
    if (it % 2 == 1) std::reverse(half_a.begin(), half_a.end());
    return half_a;
  }
  return std::nullopt;
}

SceneSpec generate_scenario(Family family, std::uint64_t seed, const DifficultyConfig& difficulty,
                            const RobotModel& model) {
  for (int i = 0; i < kMaxResamples; ++i) {
    if (auto spec = attempt(family, seed, i, difficulty, model)) return *spec;
  }
  throw std::runtime_error("generate_scenario: no feasible " + std::string(family_name(family)) +
                           " scene after " + std::to_string(kMaxResamples) +
                           " resamples for seed " + std::to_string(seed));
}

DifficultyConfig DifficultyConfig::from_json(const nlohmann::json& j) {
  DifficultyConfig d;
  nlohmann::json merged = d.to_json();
  for (const auto& [key, value] : j.items()) {
    if (!merged.contains(key)) throw InputError("difficulty: unknown field '" + key + "'");
    merged[key] = value;
  }
#define REFLEX_FIELD(name) d.name = merged.at(#name).get<decltype(d.name)>();
  REFLEX_FIELD(se_min_obstacles)
  REFLEX_FIELD(se_max_obstacles)
  REFLEX_FIELD(lite_min_obstacles)
  REFLEX_FIELD(lite_max_obstacles)
  REFLEX_FIELD(path_margin)
  REFLEX_FIELD(fdo_min_spheres)
  REFLEX_FIELD(fdo_max_spheres)
  REFLEX_FIELD(fdo_min_speed)
  REFLEX_FIELD(fdo_max_speed)
  REFLEX_FIELD(fdo_min_radius)
  REFLEX_FIELD(fdo_max_radius)
  REFLEX_FIELD(fdo_region_margin)
  REFLEX_FIELD(fdo_start_clearance)
  REFLEX_FIELD(fdo_goal_region)
  REFLEX_FIELD(dgb_min_speed)
  REFLEX_FIELD(dgb_max_speed)
  REFLEX_FIELD(dgb_min_radius)
  REFLEX_FIELD(dgb_max_radius)
  REFLEX_FIELD(dgb_delay)
  REFLEX_FIELD(sao_appear_fraction)
#undef REFLEX_FIELD
  return d;
}

nlohmann::json DifficultyConfig::to_json() const {
  return {{"se_min_obstacles", se_min_obstacles},
          {"se_max_obstacles", se_max_obstacles},
          {"lite_min_obstacles", lite_min_obstacles},
          {"lite_max_obstacles", lite_max_obstacles},
          {"path_margin", path_margin},
          {"fdo_min_spheres", fdo_min_spheres},
          {"fdo_max_spheres", fdo_max_spheres},
          {"fdo_min_speed", fdo_min_speed},
          {"fdo_max_speed", fdo_max_speed},
          {"fdo_min_radius", fdo_min_radius},
          {"fdo_max_radius", fdo_max_radius},
          {"fdo_region_margin", fdo_region_margin},
          {"fdo_start_clearance", fdo_start_clearance},
          {"fdo_goal_region", fdo_goal_region},
          {"dgb_min_speed", dgb_min_speed},
          {"dgb_max_speed", dgb_max_speed},
          {"dgb_min_radius", dgb_min_radius},
          {"dgb_max_radius", dgb_max_radius},
          {"dgb_delay", dgb_delay},
          {"sao_appear_fraction", sao_appear_fraction}};
}

}  // namespace reflex
