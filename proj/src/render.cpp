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
#include <numeric>

#include "reflex/simbench.hpp"

namespace reflex {

namespace {

constexpr double kBackdropRadius = 50.0;  // m
constexpr std::uint64_t kBackdropStream = 0xBAC4D409ULL;
constexpr std::uint64_t kNoiseStream = 0x5E5C0DEULL;

}  // namespace

std::vector<Vec3> sample_surface(const Shape& shape, std::size_t n, Rng& rng) {
  std::vector<Vec3> out;
  out.reserve(n);
  if (const auto* ball = std::get_if<Ball>(&shape)) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(ball->radius * rng.unit_vector());
    return out;
  }
  const Vec3& h = std::get<Box>(shape).half_extents;
  // Face pair normal to axis a has area 2 * (4 h_b h_c).
  const double w[3] = {h.y() * h.z(), h.x() * h.z(), h.x() * h.y()};
  const double total = w[0] + w[1] + w[2];
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform() * total;
    const int axis = u < w[0] ? 0 : (u < w[0] + w[1] ? 1 : 2);
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    Vec3 p;
    for (int a = 0; a < 3; ++a) p[a] = rng.uniform(-h[a], h[a]);
    p[axis] = sign * h[axis];
    out.push_back(p);
  }
  return out;
}

SceneRenderer::SceneRenderer(const SceneSpec& spec, std::size_t n, std::uint64_t seed,
                             double noise_sigma)
    : n_(n), seed_(seed), sigma_(noise_sigma) {
  if (n < 1) throw InputError("render_scene_cloud: n must be >= 1");
  if (noise_sigma < 0.0) throw InputError("render_scene_cloud: negative noise sigma");
  const Rng root(seed);
  std::vector<Shape> shapes = spec.static_obstacles;
  for (const auto& d : spec.dynamic_obstacles) shapes.push_back(d.shape);
  for (std::size_t k = 0; k < shapes.size(); ++k) {
    Rng stream = root.split(k);
    areas_.push_back(surface_area(shapes[k]));
    local_.push_back(sample_surface(shapes[k], n, stream));
  }
  Rng backdrop = root.split(kBackdropStream);
  backdrop_ = sample_surface(Ball{Vec3::Zero(), kBackdropRadius}, n, backdrop);
}

PointCloud SceneRenderer::render(std::span<const SceneWorld::Placement> placements,
                                 std::int64_t tick) const {
  PointCloud cloud;
  cloud.stamp = tick;
  cloud.points.reserve(n_);

  // Largest-remainder allocation of n over the active primitives by area.
  std::vector<std::size_t> active;
  double total = 0.0;
  for (std::size_t k = 0; k < placements.size(); ++k) {
    if (placements[k].active) {
      active.push_back(k);
      total += areas_[k];
    }
  }
  if (active.empty()) {
    cloud.points = backdrop_;
  } else {
    std::vector<std::size_t> count(active.size());
    std::vector<std::pair<double, std::size_t>> remainder;
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < active.size(); ++i) {
      const double exact = static_cast<double>(n_) * areas_[active[i]] / total;
      count[i] = static_cast<std::size_t>(std::floor(exact));
      assigned += count[i];
      remainder.emplace_back(-(exact - std::floor(exact)), i);
    }
    std::sort(remainder.begin(), remainder.end());
    for (std::size_t r = 0; assigned < n_; ++r, ++assigned) ++count[remainder[r].second];

    for (std::size_t i = 0; i < active.size(); ++i) {
      const std::size_t k = active[i];
      const Vec3 center = shape_center(placements[k].shape);
      for (std::size_t j = 0; j < count[i]; ++j) cloud.points.push_back(center + local_[k][j]);
    }
  }

  if (sigma_ > 0.0) {
    Rng noise = Rng(seed_).split(kNoiseStream).split(static_cast<std::uint64_t>(tick));
    for (auto& p : cloud.points) {
      p += sigma_ * Vec3(noise.normal(), noise.normal(), noise.normal());
    }
  }
  return cloud;
}

PointCloud render_scene_cloud(const SceneSpec& spec, std::int64_t tick, std::size_t n,
                              std::uint64_t seed, double tick_rate, double noise_sigma) {
  const double t = static_cast<double>(tick) / tick_rate;
  const SceneWorld world(spec, t + 1.0);
  const auto placements = world.at(t);
  return SceneRenderer(spec, n, seed, noise_sigma).render(placements, tick);
}

}  // namespace reflex
