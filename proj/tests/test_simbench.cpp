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


#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "reflex/simbench.hpp"

namespace reflex {
namespace {

using testing::panda;

const DifficultyConfig kDifficulty;

// Point-in-primitive written out independently of the library.
bool inside(const Shape& s, const Vec3& p) {
  if (const auto* b = std::get_if<Box>(&s)) {
    return ((p - b->center).cwiseAbs().array() <= b->half_extents.array()).all();
  }
  const auto& ball = std::get<Ball>(s);
  return (p - ball.center).norm() <= ball.radius;
}

TEST_CASE("scenario generation is deterministic per family and seed") {
  for (Family f : kAllFamilies) {
    const SceneSpec a = generate_scenario(f, 0, kDifficulty, panda());
    const SceneSpec b = generate_scenario(f, 0, kDifficulty, panda());
    const SceneSpec c = generate_scenario(f, 1, kDifficulty, panda());
    CAPTURE(family_name(f));
    CHECK(a == b);
    CHECK(a.to_json() == b.to_json());
    CHECK_FALSE(a == c);
    CHECK(SceneSpec::from_json(a.to_json()) == a);
  }
}

TEST_CASE("generated scenes are consistent and start collision-free") {
  for (Family f : kAllFamilies) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const SceneSpec s = generate_scenario(f, seed, kDifficulty, panda());
      CAPTURE(family_name(f));
      CAPTURE(seed);
      CHECK_NOTHROW(s.validate());
      const Transform ee = forward_kinematics(panda(), s.q_g).end_effector;
      CHECK((ee.translation() - s.goal_position).norm() < 1e-9);
      CHECK(quaternion_angle_deg(Eigen::Quaterniond(ee.rotation()), s.goal_orientation) < 1e-6);
      CHECK_FALSE(check_collision(panda(), s.q_start, s, 0).colliding);
    }
  }
}

TEST_CASE("SE scenes admit a collision-free path from start to goal") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SceneSpec s = generate_scenario(Family::kSE, seed, kDifficulty, panda());
    CHECK(s.static_obstacles.size() >= 3);
    CHECK(s.static_obstacles.size() <= 8);
    const auto path = find_feasible_path(panda(), s.q_start, s.q_g, s.static_obstacles, seed);
    REQUIRE(path.has_value());
    CHECK(path->front() == s.q_start);
    CHECK(path->back() == s.q_g);
    for (std::size_t i = 1; i < path->size(); ++i) {
      CHECK(straight_path_clear(panda(), (*path)[i - 1], (*path)[i], s.static_obstacles, 0.0));
    }
  }
}

TEST_CASE("GB scenes put the goal inside a blocker") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SceneSpec s = generate_scenario(Family::kGB, seed, kDifficulty, panda());
    bool blocked = false;
    for (const auto& o : s.static_obstacles) blocked = blocked || inside(o, s.goal_position);
    CHECK(blocked);
  }
}

TEST_CASE("render returns exactly n points") {
  const SceneSpec s = generate_scenario(Family::kFDO, 3, kDifficulty, panda());
  for (std::size_t n : {1u, 7u, 2048u}) {
    CHECK(render_scene_cloud(s, 0, n, 11).size() == n);
    CHECK(render_scene_cloud(s, 40, n, 11).size() == n);
  }
  CHECK(render_scene_cloud(SceneSpec{}, 0, 2048, 1).size() == 2048);
}

TEST_CASE("a lone box renders onto its surface") {
  SceneSpec s;
  s.static_obstacles.push_back(Box{Vec3(0.5, 0.0, 0.5), Vec3(0.5, 0.5, 0.5)});
  const PointCloud c = render_scene_cloud(s, 0, 5000, 2);
  for (const auto& p : c.points) CHECK(std::abs(signed_distance(s.static_obstacles[0], p)) < 1e-9);
}

TEST_CASE("points are allocated in proportion to surface area") {
  // Box area 6 * (2h)^2 = 24 h^2; ball area 4 pi r^2. Pick r so A_box = 2 A_ball.
  const double h = 0.1;
  const double r = std::sqrt(24.0 * h * h / (8.0 * std::numbers::pi));
  SceneSpec s;
  s.static_obstacles.push_back(Box{Vec3(-1.0, 0.0, 0.5), Vec3::Constant(h)});
  s.static_obstacles.push_back(Ball{Vec3(1.0, 0.0, 0.5), r});
  REQUIRE(surface_area(s.static_obstacles[0]) == doctest::Approx(2.0 * surface_area(s.static_obstacles[1])));
  constexpr std::size_t n = 100000;
  const PointCloud c = render_scene_cloud(s, 0, n, 3);
  std::size_t on_box = 0;
  for (const auto& p : c.points) on_box += std::abs(signed_distance(s.static_obstacles[0], p)) < 1e-9;
  const double expected = n * 2.0 / 3.0;
  const double sigma = std::sqrt(n * (2.0 / 3.0) * (1.0 / 3.0));
  CHECK(std::abs(static_cast<double>(on_box) - expected) < 5.0 * sigma);
}

TEST_CASE("samples cover a ball uniformly in area") {
  // Equal-area zones of a sphere: z in each of 10 equal slices is equally likely.
  Rng rng(4);
  const auto pts = sample_surface(Ball{Vec3::Zero(), 1.0}, 100000, rng);
  std::array<int, 10> zones{};
  for (const auto& p : pts) {
    CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-12));
    zones[std::min(9, static_cast<int>((p.z() + 1.0) * 5.0))]++;
  }
  double chi2 = 0.0;
  for (int z : zones) chi2 += (z - 10000.0) * (z - 10000.0) / 10000.0;
  CHECK(chi2 < 30.0);  // 9 dof, far beyond the 0.999 quantile (27.9)
}

TEST_CASE("static geometry renders identically on every tick") {
  const SceneSpec s = generate_scenario(Family::kFDO, 5, kDifficulty, panda());
  const SceneWorld world(s, 20.0);
  const SceneRenderer renderer(s, 2048, 9);
  const PointCloud a = renderer.render(world.at(0.0), 0);
  const PointCloud b = renderer.render(world.at(0.5), 25);
  REQUIRE(a.size() == b.size());
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a.points[i] == b.points[i];
  CHECK(same > 0);
  // Every point that changed lies on a dynamic sphere at the later time.
  const auto shapes = world.active_shapes(0.5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.points[i] == b.points[i]) continue;
    bool on_moving = false;
    for (std::size_t k = s.static_obstacles.size(); k < shapes.size(); ++k) {
      on_moving = on_moving || std::abs(signed_distance(shapes[k], b.points[i])) < 1e-9;
    }
    CHECK(on_moving);
  }
}

TEST_CASE("render noise is zero-mean jitter of the configured size") {
  SceneSpec s;
  s.static_obstacles.push_back(Box{Vec3(0.5, 0.0, 0.5), Vec3::Constant(0.2)});
  const PointCloud clean = render_scene_cloud(s, 0, 20000, 5);
  const PointCloud noisy = render_scene_cloud(s, 0, 20000, 5, 50.0, 0.002);
  Vec3 mean = Vec3::Zero();
  double var = 0.0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const Vec3 d = noisy.points[i] - clean.points[i];
    mean += d;
    var += d.squaredNorm();
  }
  mean /= static_cast<double>(clean.size());
  var /= 3.0 * static_cast<double>(clean.size());
  CHECK(mean.norm() < 1e-4);
  CHECK(std::sqrt(var) == doctest::Approx(0.002).epsilon(0.05));
}

TEST_CASE("collision check analytic cases") {
  const Vec7 q = (Vec7() << 0.0, -0.785, 0.0, -2.356, 0.0, 1.571, 0.785).finished();
  const PosedRobot posed = pose_robot(panda(), q);

  const Shape far[] = {Ball{Vec3(3.0, 3.0, 3.0), 0.1}, Box{Vec3(-3.0, 0.0, 0.5), Vec3::Constant(0.2)}};
  const auto clear = check_collision(panda(), posed, far);
  CHECK_FALSE(clear.colliding);
  CHECK(clear.clearance > 0.0);

  for (std::size_t s = 0; s < posed.centers.size(); s += 5) {
    const double r2 = 0.03;
    const Shape on[] = {Ball{posed.centers[s], r2}};
    double expected = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < posed.centers.size(); ++k) {
      expected = std::min(expected, (posed.centers[k] - posed.centers[s]).norm() -
                                        panda().spheres()[k].radius - r2);
    }
    const auto hit = check_collision(panda(), posed, on);
    CHECK(hit.colliding);
    CHECK(hit.clearance <= -(panda().spheres()[s].radius + r2));
    CHECK(hit.clearance == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("collision flag agrees with a dense sampling oracle") {
  const RobotCloudSampler robot_sampler(panda(), 100000, 6);
  Rng rng(7);
  int disagreements = 0, collisions = 0, checked = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SceneSpec scene = generate_scenario(Family::kSE, seed, kDifficulty, panda());
    // Obstacle-surface samples catch the case of a robot sphere swallowing
    // a small obstacle; robot-surface samples catch the converse.
    std::vector<Vec3> obstacle_points;
    for (const auto& o : scene.static_obstacles) {
      for (const auto& p : sample_surface(o, 2000, rng)) obstacle_points.push_back(p + shape_center(o));
    }
    for (int i = 0; i < 100; ++i) {
      const Vec7 q = testing::random_configuration(rng);
      const PosedRobot posed = pose_robot(panda(), q);
      const CollisionResult got = check_collision(panda(), posed, scene.static_obstacles);
      bool oracle = false;
      const PointCloud surface = robot_sampler.sample(posed);
      for (const auto& o : scene.static_obstacles) {
        for (const auto& p : surface.points) {
          if (inside(o, p)) {
            oracle = true;
            break;
          }
        }
        if (oracle) break;
      }
      for (std::size_t k = 0; k < posed.centers.size() && !oracle; ++k) {
        for (const auto& p : obstacle_points) {
          if ((p - posed.centers[k]).norm() <= panda().spheres()[k].radius) {
            oracle = true;
            break;
          }
        }
      }
      ++checked;
      collisions += got.colliding;
      if (oracle != got.colliding) {
        ++disagreements;
        CAPTURE(got.clearance);
        CHECK(std::abs(got.clearance) < 0.002);
      }
    }
  }
  CHECK(checked == 1000);
  CHECK(collisions > 50);  // the sample has both outcomes
  CHECK(collisions < 950);
  MESSAGE("oracle disagreements within 2 mm: " << disagreements);
}

TEST_CASE("clearance is continuous along joint-space lines") {
  Rng rng(8);
  const SceneSpec scene = generate_scenario(Family::kSE, 4, kDifficulty, panda());
  for (int line = 0; line < 20; ++line) {
    const Vec7 a = testing::random_configuration(rng), b = testing::random_configuration(rng);
    double last = check_collision(panda(), a, scene, 0).clearance;
    constexpr int kSteps = 400;
    const double step = (b - a).lpNorm<1>() / kSteps;
    for (int k = 1; k <= kSteps; ++k) {
      const Vec7 q = a + (b - a) * (static_cast<double>(k) / kSteps);
      const double now = check_collision(panda(), q, scene, 0).clearance;
      // Every point of the arm lies within 1.5 m of every joint axis.
      CHECK(std::abs(now - last) <= 1.5 * step + 1e-12);
      last = now;
    }
  }
}

TEST_CASE("success thresholds are exact") {
  const Vec7 q = (Vec7() << 0.0, -0.785, 0.0, -2.356, 0.0, 1.571, 0.785).finished();
  const Transform ee = forward_kinematics(panda(), q).end_effector;
  const Eigen::Quaterniond rot(ee.rotation());

  const auto at_goal = check_success(panda(), q, ee.translation(), rot);
  CHECK(at_goal.reached);
  CHECK(at_goal.pos_err < 1e-12);
  CHECK(at_goal.ang_err < 1e-6);

  CHECK_FALSE(check_success(ee, ee.translation() + Vec3(0.011, 0.0, 0.0), rot).reached);
  CHECK(check_success(ee, ee.translation() + Vec3(0.0, 0.0099, 0.0), rot).reached);

  const auto turned = [&](double deg) {
    return Eigen::Quaterniond(rot * Eigen::AngleAxisd(deg * std::numbers::pi / 180.0, Vec3(0.3, -0.5, 0.8).normalized()));
  };
  const auto small = check_success(ee, ee.translation(), turned(14.9));
  CHECK(small.reached);
  CHECK(small.ang_err == doctest::Approx(14.9).epsilon(1e-9));
  CHECK_FALSE(check_success(ee, ee.translation(), turned(15.1)).reached);
  // q and -q are the same orientation.
  CHECK(quaternion_angle_deg(rot, Eigen::Quaterniond(-rot.coeffs())) < 1e-6);
}

TEST_CASE("executor respects velocity and acceleration limits") {
  const JointLimits& lim = panda().limits();
  const double tick = 0.02;
  Rng rng(9);
  JointState state{testing::random_configuration(rng), Vec7::Zero()};
  for (int t = 0; t < 500; ++t) {
    ActionChunk chunk;
    for (int s = 0; s < 10; ++s) chunk.deltas.push_back(Vec7::NullaryExpr([&] { return rng.uniform(-0.1, 0.1); }));
    const JointState next = execute_first_delta(panda(), state, chunk, tick);
    for (int j = 0; j < kNumJoints; ++j) {
      CHECK(std::abs(next.qdot[j]) <= lim.velocity[j] * (1 + 1e-12));
      CHECK(std::abs(next.qdot[j] - state.qdot[j]) <= lim.acceleration[j] * tick * (1 + 1e-12) + 1e-12);
      CHECK(next.q[j] >= lim.lower[j]);
      CHECK(next.q[j] <= lim.upper[j]);
    }
    state = next;
  }
  CHECK_THROWS_AS(execute_first_delta(panda(), state, ActionChunk{}, tick), InputError);
}

EpisodeConfig quick_config() {
  EpisodeConfig c;
  c.horizon = 400;
  return c;
}

TEST_CASE("an empty scene is always reached without collision") {
  Rng rng(10);
  for (int trial = 0; trial < 3; ++trial) {
    SceneSpec s;
    s.q_start = testing::random_configuration(rng);
    s.q_g = testing::random_configuration(rng);
    const Transform ee = forward_kinematics(panda(), s.q_g).end_effector;
    s.goal_position = ee.translation();
    s.goal_orientation = Eigen::Quaterniond(ee.rotation());
    for (bool dcp : {false, true}) {
      const EpisodeReport r = run_episode(s, panda(), "interpolator", dcp, quick_config());
      CHECK(r.reached);
      CHECK_FALSE(r.collided);
      CHECK(r.success);
      CHECK_FALSE(r.faulted);
    }
  }
}

TEST_CASE("the interpolator drives into a goal blocker") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SceneSpec s = generate_scenario(Family::kGB, seed, kDifficulty, panda());
    const EpisodeReport r = run_episode(s, panda(), "interpolator", false, quick_config());
    CAPTURE(seed);
    CHECK(r.collided);
    CHECK_FALSE(r.success);
  }
}

// A lone fast sphere timed to cut through the end effector's straight-line
// path halfway, crossing from one side to the other.
SceneSpec crossing_scene(std::uint64_t seed) {
  SceneSpec s = generate_scenario(Family::kFDO, seed, kDifficulty, panda());
  s.static_obstacles.clear();
  Rng rng(seed + 500);
  const ChunkSpec spec = EpisodeConfig{}.chunk_spec(panda());
  const double span = (s.q_g - s.q_start).lpNorm<Eigen::Infinity>();
  const double t_mid = 0.5 * span / spec.step_limit * spec.tick;
  const Vec7 q_mid = 0.5 * (s.q_start + s.q_g);
  const Vec3 mid = forward_kinematics(panda(), q_mid).end_effector.translation();
  const Vec3 travel = s.goal_position - forward_kinematics(panda(), s.q_start).end_effector.translation();
  // Normal to the plane through the base, the midpoint and the travel
  // direction, so the sphere's line passes no closer to the base than the
  // midpoint itself.
  Vec3 side = travel.cross(mid);
  if (side.norm() < 1e-6) side = Vec3::UnitX();
  side.normalize();
  if (rng.uniform() < 0.5) side = -side;
  // Start well clear of the arm, then pick the speed that meets the
  // end effector at the midpoint, within a fast-obstacle range.
  constexpr double kRadius = 0.08;
  double lead = 0.3;
  const PosedRobot start = pose_robot(panda(), s.q_start);
  for (;; lead += 0.05) {
    const Shape probe[] = {Ball{mid + lead * side, kRadius}};
    if (check_collision(panda(), start, probe).clearance >= 0.2) break;
  }
  WaypointScript w;
  w.speed = std::clamp(lead / t_mid, 0.6, 1.5);
  w.start = mid + lead * side;
  w.region_lo = w.region_hi = mid - lead * side;
  s.dynamic_obstacles = {{Ball{Vec3::Zero(), kRadius}, w}};
  return s;
}

TEST_CASE("a single-point waypoint region parks the obstacle there") {
  SceneSpec s;
  WaypointScript w;
  w.speed = 1.0;
  w.start = Vec3(0.5, 0.0, 0.5);
  w.region_lo = w.region_hi = Vec3(0.5, 0.4, 0.5);
  s.dynamic_obstacles = {{Ball{Vec3::Zero(), 0.05}, w}};
  const SceneWorld world(s, 20.0);
  const auto mid = world.active_shapes(0.2);
  const auto late = world.active_shapes(15.0);
  REQUIRE(mid.size() == 1);
  CHECK((shape_center(mid[0]) - Vec3(0.5, 0.2, 0.5)).norm() < 1e-12);
  CHECK((shape_center(late[0]) - w.region_hi).norm() < 1e-12);
}

TEST_CASE("a crossing sphere is kept farther away with goal proposals on") {
  EpisodeConfig config = quick_config();
  config.stop_on_collision = false;
  int better = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const SceneSpec s = crossing_scene(seed);
    const EpisodeReport off = run_episode(s, panda(), "interpolator", false, config);
    const EpisodeReport on = run_episode(s, panda(), "interpolator", true, config);
    ++total;
    better += on.min_clearance > off.min_clearance;
  }
  MESSAGE("min-clearance larger with proposals on: " << better << " / " << total);
  CHECK(better >= 90);
}

TEST_CASE("episodes are deterministic and success implies reach") {
  for (Family f : kAllFamilies) {
    const SceneSpec s = generate_scenario(f, 2, kDifficulty, panda());
    for (const auto& policy : policy_names()) {
      const EpisodeReport a = run_episode(s, panda(), policy, true, quick_config());
      const EpisodeReport b = run_episode(s, panda(), policy, true, quick_config());
      CHECK(a.to_json().dump() == b.to_json().dump());
      CHECK((!a.success || (a.reached && !a.collided)));
      CHECK(EpisodeReport::from_json(a.to_json()).to_json() == a.to_json());
    }
  }
}

EpisodeReport report(bool reached, bool collided, double clearance, bool faulted = false) {
  EpisodeReport r;
  r.reached = reached;
  r.collided = collided;
  r.success = reached && !collided && !faulted;
  r.faulted = faulted;
  r.min_clearance = clearance;
  return r;
}

TEST_CASE("aggregate") {
  const std::vector<EpisodeReport> all{report(true, false, 0.1), report(true, false, 0.3)};
  const SuiteSummary s = aggregate(all);
  CHECK(s.reach_rate == 100.0);
  CHECK(s.collision_rate == 0.0);
  CHECK(s.success_rate == 100.0);
  CHECK(s.mean_min_clearance == doctest::Approx(0.2));

  const std::vector<EpisodeReport> half{report(true, true, -0.01), report(true, false, 0.05)};
  const SuiteSummary h = aggregate(half);
  CHECK(h.reach_rate == 100.0);
  CHECK(h.collision_rate == 50.0);
  CHECK(h.success_rate == 50.0);

  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<EpisodeReport> list;
    const int n = rng.uniform_int(1, 40);
    int counted = 0, reached = 0, collided = 0, success = 0, faults = 0;
    double clearance = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto r = report(rng.uniform() < 0.7, rng.uniform() < 0.3, rng.uniform(-0.05, 0.3), rng.uniform() < 0.1);
      list.push_back(r);
      if (r.faulted) {
        ++faults;
        continue;
      }
      ++counted;
      reached += r.reached;
      collided += r.collided;
      success += r.success;
      clearance += r.min_clearance;
    }
    const SuiteSummary got = aggregate(list);
    CHECK(got.episodes == static_cast<std::size_t>(n));
    CHECK(got.faults == static_cast<std::size_t>(faults));
    if (counted > 0) {
      CHECK(got.reach_rate == doctest::Approx(100.0 * reached / counted));
      CHECK(got.collision_rate == doctest::Approx(100.0 * collided / counted));
      CHECK(got.success_rate == doctest::Approx(100.0 * success / counted));
      CHECK(got.mean_min_clearance == doctest::Approx(clearance / counted));
    }
  }
  CHECK_THROWS_AS(aggregate(std::span<const EpisodeReport>{}), InputError);
}

TEST_CASE("summary rows follow the CSV header") {
  const std::vector<EpisodeReport> all{report(true, false, 0.1)};
  const std::string row = summary_csv_row("fdo", "interpolator", true, aggregate(all));
  CHECK(std::count(row.begin(), row.end(), ',') ==
        std::count(kSummaryCsvHeader, kSummaryCsvHeader + std::strlen(kSummaryCsvHeader), ','));
  CHECK(row.rfind("fdo,interpolator,", 0) == 0);
}

}  // namespace
}  // namespace reflex
