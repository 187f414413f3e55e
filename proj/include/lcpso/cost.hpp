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

#ifndef LCPSO__COST_HPP_
#define LCPSO__COST_HPP_

#include "lcpso/geometry.hpp"
#include "lcpso/prediction.hpp"
#include "lcpso/types.hpp"

#include <span>
#include <vector>

namespace lcpso::cost
{

struct CostWeights
{
  double w_ref{1.0};
  double w_head{10.0};
  double w_col{1.0};
  double w_a{0.1};
  double w_j{0.05};
  double w_s{1.0};
  double w_la{50.0};
  double collision_penalty{1.0e6};
  double lane_violation_penalty{1.0e4};

  void validate() const;
};

enum class HeadingCost
{
  squared,
  signed_sum,  // the literal unsquared sum; kept for comparison runs only
};

struct CostBreakdown
{
  double f_ref{0.0};
  double f_head{0.0};
  double f_col{0.0};
  double f_a{0.0};
  double f_j{0.0};
  double f_s{0.0};
  double f_la{0.0};
  double total{0.0};
};

struct Waypoint
{
  double x{0.0};
  double y{0.0};
  double v{0.0};
};

/// Reference the swarm tracks. Sequences are indexed by time step 1..N (the starting state is
/// not part of the reference).
struct Reference
{
  double dt{0.1};
  std::vector<Waypoint> waypoints;
  std::vector<double> heading;
  std::vector<double> steering;
  std::vector<double> accel;
  double lane_center_y{0.0};
  double road_lower{-1.75};  // road edges; the vehicle body must stay between them
  double road_upper{5.25};

  std::size_t size() const { return waypoints.size(); }
  void validate() const;
  /// Reference waypoints as a trajectory with states[0] = start (for predictors and plotting).
  Trajectory as_trajectory(const VehicleState & start) const;
};

struct ReferenceControls
{
  std::vector<double> accel;
  std::vector<double> heading;
  std::vector<double> steering;
};

/// Feed-forward controls for waypoints p_0..p_N (p_0 is the current position).
/// Headings come from forward finite differences; accelerations from forward differences of
/// speed; steering inverts the slip-angle and heading-rate relations of the bicycle model so
/// that the heading turn between segments k and k+1 is produced by control k.
/// Each returned sequence has N entries.
ReferenceControls reference_controls_from_waypoints(
  std::span<const Waypoint> waypoints, const VehicleGeometry & geom, double dt);

/// Steering that reproduces the heading increments of `headings` (N+1 values) at the given
/// speeds (first N used).
std::vector<double> steering_from_headings(
  std::span<const double> headings, std::span<const double> speeds, const VehicleGeometry & geom,
  double dt);

struct EvaluationContext
{
  const geometry::ObstacleSet * obstacles{nullptr};  // aligned with states 1..N, may be null
  VehicleGeometry ego_geometry;
  geometry::SafetySpec safety;
  CostWeights weights;
  HeadingCost heading_cost{HeadingCost::squared};
};

struct CostEvaluation
{
  CostBreakdown terms;
  geometry::Clearance clearance;
  bool collision{false};
  bool lane_violation{false};
  double terminal_offset{0.0};  // |y_N - y_c|
};

/// Scores a rollout (N+1 states, states[0] is the start) driven by `steering` (N values)
/// against `reference`.
CostEvaluation evaluate(
  const Trajectory & traj, std::span<const double> steering, const Reference & reference,
  const EvaluationContext & ctx);

/// Same as above, preparing obstacles from a raw prediction (padded by `padding`).
CostEvaluation evaluate(
  const Trajectory & traj, std::span<const double> steering, const Reference & reference,
  const prediction::PredictionMatrix & predictions,
  std::span<const VehicleGeometry> other_geometries, EvaluationContext ctx,
  geometry::Padding padding = geometry::Padding::hold);

/// Sum of the seven terms in a fixed order.
double sum_terms(const CostBreakdown & b);

}  // namespace lcpso::cost

#endif  // LCPSO__COST_HPP_
