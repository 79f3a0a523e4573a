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

#include "reflex/point_cloud.hpp"

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace reflex {

bool PointCloud::all_finite() const {
  for (const auto& p : points) {
    if (!p.allFinite()) return false;
  }
  return true;
}

void write_cloud(std::ostream& out, const PointCloud& cloud) {
  out << std::setprecision(17);
  for (const auto& p : cloud.points) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
}

PointCloud read_cloud(std::istream& in) {
  PointCloud cloud;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    Vec3 p;
    if (!(fields >> p.x() >> p.y() >> p.z())) throw InputError("cloud dump: malformed line: " + line);
    cloud.points.push_back(p);
  }
  if (!cloud.all_finite()) throw InputError("cloud dump: non-finite coordinate");
  return cloud;
}

}  // namespace reflex
