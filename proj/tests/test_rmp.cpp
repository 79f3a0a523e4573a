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

#include <array>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "fixtures.hpp"
#include "reflex/rmp.hpp"

namespace reflex {
namespace {

using testing::panda;

Vec7 random_vec7(Rng& rng, double scale = 1.0) {
  Vec7 v;
  for (int i = 0; i < 7; ++i) v[i] = rng.uniform(-scale, scale);
  return v;
}

Row7 random_row7(Rng& rng) { return random_vec7(rng).transpose(); }

TEST_CASE("attractor") {
  RmpParams p;
  Rng rng(1);
  const Vec7 q = random_vec7(rng);
  CHECK(attractor(q, Vec7::Zero(), q, p).f.isZero(0.0));
  CHECK(attractor(q, Vec7::Zero(), q, p).M == p.mu_g * Mat7::Identity());

  p.k_g = 1.0;
  const Vec7 goal = random_vec7(rng);
  CHECK(attractor(q, Vec7::Zero(), goal, p).f == goal - q);

  p = RmpParams{};
  for (int i = 0; i < 100; ++i) {
    const Vec7 a = random_vec7(rng), b = random_vec7(rng), g = random_vec7(rng);
    const Vec7 f = attractor(a, b, g, p).f;
    for (int j = 0; j < 7; ++j) CHECK(f[j] == p.k_g * (g[j] - a[j]) - p.k_d * b[j]);
  }
}

TEST_CASE("repulsor at the cutoff and at contact") {
  RmpParams p;
  p.k_p = 8.0;  // non-zero so the contact push is visible
  for (double v : {-3.0, 0.0, 0.4, 10.0}) CHECK(repulsor_task(p.r, v, p).M == 0.0);

  const TaskRmp contact = repulsor_task(0.0, 0.0, p);
  CHECK(contact.f == p.k_p);
  CHECK(contact.M == doctest::Approx(0.5 * p.mu_r / p.eps_m).epsilon(1e-15));
  CHECK(closing_gate(0.0, p.l_v) == 0.5);
}

TEST_CASE("a fast receding obstacle switches the repulsor metric off") {
  RmpParams p;
  for (double x : {0.0, 0.01, 0.1}) CHECK(repulsor_task(x, 100.0 * p.l_v, p).M < 1e-6);
}

TEST_CASE("repulsor metric is non-negative and vanishes past the cutoff") {
  RmpParams p;
  Rng rng(2);
  for (int i = 0; i < 5000; ++i) {
    const double x = rng.uniform(0.0, 2.0 * p.r);
    const double v = rng.uniform(-50.0, 50.0);
    const TaskRmp t = repulsor_task(x, v, p);
    CHECK(t.M >= 0.0);
    if (x > p.r) CHECK(t.M == 0.0);
  }
  CHECK(cutoff_weight(p.r - 1e-8, p.r) < 1e-12);
  CHECK(cutoff_weight(p.r + 1e-8, p.r) == 0.0);
  CHECK(cutoff_weight(0.0, p.r) == 1.0);
  CHECK_THROWS_AS(repulsor_task(-1e-9, 0.0, p), InputError);
}

TEST_CASE("closing gate is strictly decreasing") {
  double last = 1.0;
  for (double v = -2.0; v <= 2.0; v += 0.01) {
    const double g = closing_gate(v, 0.4);
    CHECK(g < last);
    last = g;
  }
}

TEST_CASE("pullback of an inert policy is zero") {
  Rng rng(3);
  const auto a = pullback(5.0, 0.0, random_row7(rng));
  CHECK(a.f.isZero(0.0));
  CHECK(a.M.isZero(0.0));
  const auto b = pullback(5.0, 3.0, Row7::Zero());
  CHECK(b.f.isZero(0.0));
  CHECK(b.M.isZero(0.0));
  Row7 bad = Row7::Zero();
  bad[2] = std::nan("");
  CHECK_THROWS_AS(pullback(1.0, 1.0, bad), InputError);
}

TEST_CASE("pullback equals the rank-one closed form on 1000 samples") {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) {
    const Row7 J = random_row7(rng) * std::pow(10.0, rng.uniform(-2.0, 1.0));
    const double f = rng.uniform(-100.0, 100.0);
    const double m = std::pow(10.0, rng.uniform(-3.0, 4.0));
    const JointSpaceRmp out = pullback(f, m, J);
    const Vec7 closed = J.transpose() * f / J.squaredNorm();
    CAPTURE(i);
    CHECK((out.f - closed).norm() <= 1e-9 * std::max(1.0, closed.norm()));

    Eigen::SelfAdjointEigenSolver<Mat7> eig(out.M);
    const auto& ev = eig.eigenvalues();
    const double expected = m * J.squaredNorm();
    CHECK(ev[6] == doctest::Approx(expected).epsilon(1e-9));
    for (int k = 0; k < 6; ++k) CHECK(std::abs(ev[k]) <= 1e-9 * expected);
    CHECK((out.M - out.M.transpose()).norm() <= 1e-9);
  }
}

TEST_CASE("pseudo inverse satisfies the Penrose identities") {
  Rng rng(5);
  for (int rank : {1, 3, 7}) {
    Eigen::Matrix<double, 7, Eigen::Dynamic> B(7, rank);
    for (int c = 0; c < rank; ++c) B.col(c) = random_vec7(rng);
    const Mat7 A = B * B.transpose();
    const Mat7 P = pseudo_inverse(A);
    CHECK((A * P * A - A).norm() <= 1e-9 * A.norm());
    CHECK((P * A * P - P).norm() <= 1e-9 * P.norm());
    CHECK((A * P - (A * P).transpose()).norm() <= 1e-9);
  }
}

TEST_CASE("combine") {
  Rng rng(6);
  const Vec7 f1 = random_vec7(rng), f2 = random_vec7(rng);

  SUBCASE("single invertible policy returns its own acceleration") {
    const Mat7 L = Mat7::Random() + 3.0 * Mat7::Identity();
    const std::array<JointSpaceRmp, 1> one{JointSpaceRmp{f1, L * L.transpose()}};
    CHECK((combine(one) - f1).norm() < 1e-12);
  }
  SUBCASE("an inert repulsor leaves the attractor untouched") {
    const JointSpaceRmp g = attractor(f1, f2, Vec7::Zero(), RmpParams{});
    const JointSpaceRmp r = pullback(3.0, 0.0, random_row7(rng));
    const std::array<JointSpaceRmp, 2> both{r, g};
    CHECK(combine(both) == g.f);
  }
  SUBCASE("equal identity metrics average") {
    const std::array<JointSpaceRmp, 2> both{JointSpaceRmp{f1, Mat7::Identity()},
                                            JointSpaceRmp{f2, Mat7::Identity()}};
    CHECK((combine(both) - 0.5 * (f1 + f2)).norm() < 1e-14);
  }
  SUBCASE("all metrics zero gives zero") {
    const std::array<JointSpaceRmp, 2> both{JointSpaceRmp{f1, Mat7::Zero()},
                                            JointSpaceRmp{f2, Mat7::Zero()}};
    CHECK(combine(both).isZero(0.0));
  }
  CHECK_THROWS_AS(combine(std::span<const JointSpaceRmp>{}), InputError);
}

TEST_CASE("combine is invariant under a common metric scale") {
  Rng rng(7);
  RmpParams p;
  for (int i = 0; i < 200; ++i) {
    const JointSpaceRmp g = attractor(random_vec7(rng), random_vec7(rng), random_vec7(rng), p);
    const JointSpaceRmp r = pullback(rng.uniform(-10.0, 10.0), rng.uniform(0.0, 500.0), random_row7(rng));
    const std::array<JointSpaceRmp, 2> base{g, r};
    const Vec7 ref = combine(base);
    for (double c : {0.1, 10.0}) {
      std::array<JointSpaceRmp, 2> scaled = base;
      for (auto& s : scaled) s.M *= c;
      CHECK((combine(scaled) - ref).norm() <= 1e-9 * std::max(1.0, ref.norm()));
    }
  }
}

TEST_CASE("task Jacobian matches finite differences of the squared distance") {
  Rng rng(8);
  constexpr double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const Vec7 q = testing::random_configuration(rng);
    const PosedRobot posed = pose_robot(panda(), q);
    const Vec3 x_obs = testing::random_point(rng, -1.0, 1.0);
    const SurfacePoint p = closest_surface_point(posed, panda(), x_obs);
    const Vec3 local = posed.pose.links[p.link].inverse() * p.position;
    const auto coords = repulsor_coordinates(p.position, x_obs, point_jacobian(posed.pose, panda(), p));
    CHECK(coords.x_r == (p.position - x_obs).squaredNorm());
    Row7 fd;
    for (int j = 0; j < kNumJoints; ++j) {
      Vec7 up = q, down = q;
      up[j] += h;
      down[j] -= h;
      const double xu = (forward_kinematics(panda(), up).links[p.link] * local - x_obs).squaredNorm();
      const double xd = (forward_kinematics(panda(), down).links[p.link] * local - x_obs).squaredNorm();
      fd[j] = (xu - xd) / (2 * h);
    }
    CAPTURE(i);
    CHECK(testing::relative_error(coords.J_r, fd) < 1e-5);
  }
}

// Closed-form semi-implicit Euler with constant acceleration a over n steps
// of length h: v_n = v + n a h, q_n = q + n h v + a h^2 n (n + 1) / 2.
VirtualState recurrence(const VirtualState& s, const Vec7& a, int n, double h) {
  return {s.q + n * h * s.qdot + a * h * h * n * (n + 1) / 2.0, s.qdot + n * h * a};
}

TEST_CASE("Euler sub-stepping") {
  Rng rng(9);
  RmpParams p;
  const VirtualState s{random_vec7(rng), random_vec7(rng)};

  const VirtualState rest{s.q, Vec7::Zero()};
  const VirtualState same = euler_integrate(rest, Vec7::Zero(), p);
  CHECK(same.q == rest.q);
  CHECK(same.qdot.isZero(0.0));

  const Vec7 a = random_vec7(rng, 5.0);
  p.n_int = 1;
  p.dt_int = 0.004;
  const VirtualState one = euler_integrate(s, a, p);
  CHECK(one.qdot == s.qdot + a * p.dt_int);
  CHECK(one.q == s.q + (s.qdot + a * p.dt_int) * p.dt_int);

  p.n_int = 10;
  p.dt_int = 0.01;
  const VirtualState fine = euler_integrate(s, a, p);
  p.n_int = 1;
  p.dt_int = 0.1;
  const VirtualState coarse = euler_integrate(s, a, p);
  CHECK((fine.q - coarse.q).norm() > 1e-3);
  CHECK((fine.q - recurrence(s, a, 10, 0.01).q).norm() < 1e-12);
  CHECK((coarse.q - recurrence(s, a, 1, 0.1).q).norm() < 1e-12);
  CHECK((fine.qdot - recurrence(s, a, 10, 0.01).qdot).norm() < 1e-12);

  p.n_int = 0;
  CHECK_THROWS_AS(euler_integrate(s, a, p), InputError);
}

TEST_CASE("params validate, round-trip and reject unknown names") {
  RmpParams p;
  CHECK_NOTHROW(p.validate());
  CHECK(RmpParams::field_names().size() == 15);
  p.set("k_v", 3.5);
  p.set("n_int", 7);
  const RmpParams back = RmpParams::from_json(p.to_json());
  CHECK(back.to_json() == p.to_json());
  CHECK_THROWS_AS(p.set("n_int", 2.5), InputError);
  CHECK_THROWS_AS(p.set("kv", 1.0), InputError);
  CHECK_THROWS_AS(RmpParams::from_json(nlohmann::json{{"ell_m", 0.0}}), InputError);
  CHECK_THROWS_AS(RmpParams::from_json(nlohmann::json{{"r", "big"}}), InputError);
  CHECK_THROWS_AS(RmpParams::from_json(nlohmann::json::array()), InputError);
}

}  // namespace
}  // namespace reflex
