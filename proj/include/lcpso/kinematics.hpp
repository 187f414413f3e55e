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

#ifndef LCPSO__KINEMATICS_HPP_
#define LCPSO__KINEMATICS_HPP_

#include "lcpso/types.hpp"

#include <span>

namespace lcpso::kinematics
{

/// Slip angle produced by steering angle `delta`.
double slip_angle(double delta, const VehicleGeometry & geom);

/// Advance one step of the discrete kinematic bicycle model.
///
/// The slip angle is computed from the steering applied during this step, then position,
/// heading and speed are advanced from the previous state with that slip angle. Speed is
/// clamped at zero. The returned state carries the slip angle that was used.
/// Throws PropagationError on non-finite state or input, ContractError on dt <= 0.
VehicleState step(
  const VehicleState & state, const ControlInput & input, const VehicleGeometry & geom, double dt);

/// Roll a control sequence out from `initial`; the result holds controls.size() + 1 states.
Trajectory rollout(
  const VehicleState & initial, std::span<const ControlInput> controls,
  const VehicleGeometry & geom, double dt);

/// Rollout of a steering sequence paired element-wise with an acceleration sequence.
Trajectory rollout(
  const VehicleState & initial, std::span<const double> steering, std::span<const double> accel,
  const VehicleGeometry & geom, double dt);

/// Rejects controls outside the configured bounds.
void check_bounds(const ControlInput & input, const ControlBounds & bounds);

}  // namespace lcpso::kinematics

#endif  // LCPSO__KINEMATICS_HPP_
