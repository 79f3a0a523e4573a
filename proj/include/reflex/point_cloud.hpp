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
#include <iosfwd>
#include <string>
#include <vector>

#include "reflex/types.hpp"

namespace reflex {

/// Ordered 3D points in the world frame, tagged with the tick they were
/// captured at. No implicit deduplication.
struct PointCloud {
  std::vector<Vec3> points;
  std::int64_t stamp = 0;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool all_finite() const;
};

/// Plain-text dump, one `x y z` triple per line.
void write_cloud(std::ostream& out, const PointCloud& cloud);
PointCloud read_cloud(std::istream& in);

}  // namespace reflex
