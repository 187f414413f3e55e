// Copyright 2026 The lcpso Authors
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

#include "lcpso/types.hpp"

#include <cmath>

namespace lcpso
{

void VehicleGeometry::validate() const
{
  if (!(lf > 0.0 && lr > 0.0 && half_length > 0.0 && half_width > 0.0)) {
    throw ContractError("vehicle geometry: all dimensions must be strictly positive");
  }
  if (!(half_length > half_width)) {
    throw ContractError("vehicle geometry: half_length must exceed half_width");
  }
}

std::vector<Vec2> Trajectory::positions() const
{
  std::vector<Vec2> out;
  out.reserve(states.size());
  for (const auto & s : states) {
    out.push_back({s.x, s.y});
  }
  return out;
}

int LaneLayout::lane_of(double y) const
{
  for (int lane = 0; lane < lane_count; ++lane) {
    if (std::abs(y - center(lane)) <= 0.5 * lane_width) {
      return lane;
    }
  }
  return -1;
}

}  // namespace lcpso
