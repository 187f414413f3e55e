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

#ifndef LCPSO__TYPES_HPP_
#define LCPSO__TYPES_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lcpso
{

struct Vec2
{
  double x{0.0};
  double y{0.0};
};

/// Pose, speed and slip angle of one vehicle at one time step.
struct VehicleState
{
  double x{0.0};     // longitudinal position [m]
  double y{0.0};     // lateral position [m]
  double psi{0.0};   // inertial heading [rad]
  double v{0.0};     // speed [m/s]
  double beta{0.0};  // slip angle of the center velocity [rad]
};

/// Axle distances and half extents of a vehicle body.
struct VehicleGeometry
{
  double lf{1.25};
  double lr{1.25};
  double half_length{2.5};
  double half_width{1.0};

  void validate() const;
};

struct ControlInput
{
  double delta{0.0};  // steering angle [rad]
  double accel{0.0};  // [m/s^2]
};

struct ControlBounds
{
  double max_steer{0.5};
  double max_accel{3.0};
};

/// Fixed-step sequence of states. states[0] is the state at t = 0.
struct Trajectory
{
  double dt{0.1};
  std::vector<VehicleState> states;

  std::size_t size() const { return states.size(); }
  bool empty() const { return states.empty(); }
  std::vector<Vec2> positions() const;
};

/// Straight parallel lanes along +x. Lane 0 is the bottom lane, centered at y = 0.
struct LaneLayout
{
  double lane_width{3.5};
  int lane_count{2};

  double center(int lane) const { return lane * lane_width; }
  double lower_edge() const { return -0.5 * lane_width; }
  double upper_edge() const { return (lane_count - 0.5) * lane_width; }
  /// Lane whose boundaries contain y, or -1 when y is off the road.
  int lane_of(double y) const;
};

/// Raised on violated preconditions (shape mismatches, empty inputs, bad ranges).
class ContractError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a rollout meets non-finite state data.
class PropagationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

}  // namespace lcpso

#endif  // LCPSO__TYPES_HPP_
