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

#include "lcpso/cost.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace lcpso::cost
{
namespace
{
double wrap_angle(double a)
{
  return std::remainder(a, 2.0 * std::numbers::pi);
}
}  // namespace

void CostWeights::validate() const
{
  for (double w : {w_ref, w_head, w_col, w_a, w_j, w_s, w_la, collision_penalty,
                   lane_violation_penalty}) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ContractError("cost weights must be finite and non-negative");
    }
  }
}

void Reference::validate() const
{
  const auto n = waypoints.size();
  if (heading.size() != n || steering.size() != n || accel.size() != n) {
    throw ContractError("reference sequences must all have length " + std::to_string(n));
  }
  if (!(dt > 0.0)) {
    throw ContractError("reference dt must be positive");
  }
}

Trajectory Reference::as_trajectory(const VehicleState & start) const
{
  Trajectory t;
  t.dt = dt;
  t.states.reserve(waypoints.size() + 1);
  t.states.push_back(start);
  for (std::size_t i = 0; i < waypoints.size(); ++i) {
    VehicleState s;
    s.x = waypoints[i].x;
    s.y = waypoints[i].y;
    s.v = waypoints[i].v;
    s.psi = i < heading.size() ? heading[i] : 0.0;
    t.states.push_back(s);
  }
  return t;
}

std::vector<double> steering_from_headings(
  std::span<const double> headings, std::span<const double> speeds, const VehicleGeometry & geom,
  double dt)
{
  if (headings.size() < 2 || speeds.size() + 1 < headings.size()) {
    throw ContractError("steering_from_headings: need N+1 headings and N speeds");
  }
  const std::size_t n = headings.size() - 1;
  std::vector<double> steering(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double turn = wrap_angle(headings[k + 1] - headings[k]);
    const double v = speeds[k];
    if (v * dt <= 0.0) {
      continue;
    }
    const double sin_beta = std::clamp(turn * geom.lr / (v * dt), -1.0, 1.0);
    const double beta = std::asin(sin_beta);
    steering[k] = std::atan((geom.lf + geom.lr) / geom.lr * std::tan(beta));
  }
  return steering;
}

ReferenceControls reference_controls_from_waypoints(
  std::span<const Waypoint> waypoints, const VehicleGeometry & geom, double dt)
{
  if (waypoints.size() < 3) {
    throw ContractError("reference controls need at least three waypoints");
  }
  if (!(dt > 0.0)) {
    throw ContractError("reference controls: dt must be positive");
  }
  const std::size_t n = waypoints.size() - 1;
  std::vector<Vec2> pts;
  std::vector<double> speeds;
  pts.reserve(waypoints.size());
  speeds.reserve(waypoints.size());
  for (const auto & w : waypoints) {
    pts.push_back({w.x, w.y});
    speeds.push_back(w.v);
  }
  const auto h = geometry::estimate_headings(pts);

  ReferenceControls out;
  out.accel.resize(n);
  out.heading.assign(h.begin() + 1, h.end());
  for (std::size_t k = 0; k < n; ++k) {
    out.accel[k] = (speeds[k + 1] - speeds[k]) / dt;
  }
  out.steering = steering_from_headings(h, speeds, geom, dt);
  return out;
}

double sum_terms(const CostBreakdown & b)
{
  double total = b.f_ref;
  total += b.f_head;
  total += b.f_col;
  total += b.f_a;
  total += b.f_j;
  total += b.f_s;
  total += b.f_la;
  return total;
}

CostEvaluation evaluate(
  const Trajectory & traj, std::span<const double> steering, const Reference & reference,
  const EvaluationContext & ctx)
{
  const std::size_t n = reference.size();
  if (traj.size() != n + 1) {
    throw ContractError(
      "cost: trajectory has " + std::to_string(traj.size()) + " states, expected " +
      std::to_string(n + 1));
  }
  if (steering.size() != n) {
    throw ContractError(
      "cost: steering has " + std::to_string(steering.size()) + " entries, expected " +
      std::to_string(n));
  }
  if (n == 0) {
    throw ContractError("cost: empty reference");
  }
  const auto & w = ctx.weights;
  const double dt = traj.dt;
  const auto & s = traj.states;

  CostEvaluation out;
  auto & b = out.terms;

  double ref_sum = 0.0;
  double head_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto & st = s[i + 1];
    if (!std::isfinite(st.x) || !std::isfinite(st.y) || !std::isfinite(st.psi)) {
      throw PropagationError("cost: non-finite trajectory state at step " + std::to_string(i + 1));
    }
    const double dx = st.x - reference.waypoints[i].x;
    const double dy = st.y - reference.waypoints[i].y;
    ref_sum += dx * dx + dy * dy;
    const double dpsi = st.psi - reference.heading[i];
    head_sum += ctx.heading_cost == HeadingCost::squared ? dpsi * dpsi : dpsi;
  }
  b.f_ref = w.w_ref * ref_sum;
  b.f_head = w.w_head * head_sum;

  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;
  double acc_sum = 0.0;
  for (std::size_t i = 1; i + 2 <= n; ++i) {
    const double ax = (s[i + 2].x - 2.0 * s[i + 1].x + s[i].x) / dt2;
    const double ay = (s[i + 2].y - 2.0 * s[i + 1].y + s[i].y) / dt2;
    acc_sum += ax * ax + ay * ay;
  }
  double jerk_sum = 0.0;
  for (std::size_t i = 1; i + 3 <= n; ++i) {
    const double jx = (-s[i + 3].x + 3.0 * s[i + 2].x - 3.0 * s[i + 1].x + s[i].x) / dt3;
    const double jy = (-s[i + 3].y + 3.0 * s[i + 2].y - 3.0 * s[i + 1].y + s[i].y) / dt3;
    jerk_sum += jx * jx + jy * jy;
  }
  b.f_a = w.w_a * acc_sum;
  b.f_j = w.w_j * jerk_sum;

  double steer_sum = 0.0;
  for (double d : steering) {
    steer_sum += d * d;
  }
  b.f_s = w.w_s * steer_sum;

  const double hw = ctx.ego_geometry.half_width;
  for (std::size_t i = 1; i <= n; ++i) {
    if (s[i].y - hw < reference.road_lower || s[i].y + hw > reference.road_upper) {
      out.lane_violation = true;
      break;
    }
  }
  out.terminal_offset = std::abs(s[n].y - reference.lane_center_y);
  b.f_la = w.w_la * out.terminal_offset + (out.lane_violation ? w.lane_violation_penalty : 0.0);

  if (ctx.obstacles != nullptr && !ctx.obstacles->tracks.empty()) {
    std::vector<geometry::Footprint> ego;
    ego.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
      ego.push_back(geometry::make_footprint(s[i].x, s[i].y, s[i].psi, ctx.ego_geometry));
    }
    out.clearance = geometry::min_clearance(ego, *ctx.obstacles);
    out.collision = !geometry::is_safe(out.clearance.distance, ctx.safety);
  }
  b.f_col = out.collision ? w.w_col * w.collision_penalty : 0.0;

  b.total = sum_terms(b);
  if (!std::isfinite(b.total)) {
    throw PropagationError("cost: non-finite total");
  }
  return out;
}

CostEvaluation evaluate(
  const Trajectory & traj, std::span<const double> steering, const Reference & reference,
  const prediction::PredictionMatrix & predictions,
  std::span<const VehicleGeometry> other_geometries, EvaluationContext ctx,
  geometry::Padding padding)
{
  const auto obstacles = geometry::prepare_obstacles(
    predictions.tracks, other_geometries, reference.size(), padding);
  ctx.obstacles = &obstacles;
  return evaluate(traj, steering, reference, ctx);
}

}  // namespace lcpso::cost
