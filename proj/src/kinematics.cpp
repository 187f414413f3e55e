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

#include "lcpso/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lcpso::kinematics
{
namespace
{
bool finite(const VehicleState & s)
{
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.psi) &&
         std::isfinite(s.v) && std::isfinite(s.beta);
}
}  // namespace

double slip_angle(double delta, const VehicleGeometry & geom)
{
  return std::atan(geom.lr / (geom.lf + geom.lr) * std::tan(delta));
}

VehicleState step(
  const VehicleState & state, const ControlInput & input, const VehicleGeometry & geom, double dt)
{
  if (!(dt > 0.0)) {
    throw ContractError("kinematics: dt must be positive");
  }
  if (!finite(state)) {
    throw PropagationError("kinematics: non-finite state");
  }
  if (!std::isfinite(input.delta) || !std::isfinite(input.accel)) {
    throw PropagationError("kinematics: non-finite control input");
  }

  const double beta = slip_angle(input.delta, geom);
  VehicleState next;
  next.x = dt * state.v * std::cos(state.psi + beta) + state.x;
  next.y = dt * state.v * std::sin(state.psi + beta) + state.y;
  next.psi = dt * state.v / geom.lr * std::sin(beta) + state.psi;
  next.v = std::max(0.0, dt * input.accel + state.v);
  next.beta = beta;
  return next;
}

Trajectory rollout(
  const VehicleState & initial, std::span<const ControlInput> controls,
  const VehicleGeometry & geom, double dt)
{
  if (controls.empty()) {
    throw ContractError("kinematics: rollout needs at least one control");
  }
  Trajectory traj;
  traj.dt = dt;
  traj.states.reserve(controls.size() + 1);
  traj.states.push_back(initial);
  for (const auto & u : controls) {
    traj.states.push_back(step(traj.states.back(), u, geom, dt));
  }
  return traj;
}

Trajectory rollout(
  const VehicleState & initial, std::span<const double> steering, std::span<const double> accel,
  const VehicleGeometry & geom, double dt)
{
  if (steering.size() != accel.size()) {
    throw ContractError(
      "kinematics: steering/accel length mismatch (" + std::to_string(steering.size()) + " vs " +
      std::to_string(accel.size()) + ")");
  }
  if (steering.empty()) {
    throw ContractError("kinematics: rollout needs at least one control");
  }
  Trajectory traj;
  traj.dt = dt;
  traj.states.reserve(steering.size() + 1);
  traj.states.push_back(initial);
  for (std::size_t k = 0; k < steering.size(); ++k) {
    traj.states.push_back(step(traj.states.back(), {steering[k], accel[k]}, geom, dt));
  }
  return traj;
}

void check_bounds(const ControlInput & input, const ControlBounds & bounds)
{
  if (std::abs(input.delta) > bounds.max_steer) {
    throw ContractError("kinematics: steering angle outside bounds");
  }
  if (std::abs(input.accel) > bounds.max_accel) {
    throw ContractError("kinematics: acceleration outside bounds");
  }
}

}  // namespace lcpso::kinematics
