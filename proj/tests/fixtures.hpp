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


// Shared fixtures for the unit tests.

#pragma once

#include <cmath>

#include "reflex/kinematics.hpp"
#include "reflex/rng.hpp"

namespace reflex::testing {

inline const RobotModel& panda() {
  static const RobotModel model = RobotModel::load(REFLEX_DEFAULT_ROBOT);
  return model;
}

inline Vec7 random_configuration(Rng& rng, const RobotModel& model = panda()) {
  Vec7 q;
  for (int j = 0; j < kNumJoints; ++j) {
    q[j] = rng.uniform(model.limits().lower[j], model.limits().upper[j]);
  }
  return q;
}

inline Vec3 random_point(Rng& rng, double lo, double hi) {
  return {rng.uniform(lo, hi), rng.uniform(lo, hi), rng.uniform(lo, hi)};
}

inline double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace reflex::testing
