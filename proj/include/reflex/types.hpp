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

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <stdexcept>
#include <string>

namespace reflex {

using Vec3 = Eigen::Vector3d;
using Vec7 = Eigen::Matrix<double, 7, 1>;
using Mat7 = Eigen::Matrix<double, 7, 7>;
using Row7 = Eigen::Matrix<double, 1, 7>;
using Jacobian3x7 = Eigen::Matrix<double, 3, 7>;
using Transform = Eigen::Isometry3d;

inline constexpr int kNumJoints = 7;
inline constexpr int kNumLinks = 8;  // link 0 is the fixed base

/// Thrown when a caller hands in data that violates an operation's contract.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A non-finite value appeared inside a computation that should stay finite.
class NumericalFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace reflex
