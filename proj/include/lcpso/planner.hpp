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

#ifndef LCPSO__PLANNER_HPP_
#define LCPSO__PLANNER_HPP_

#include "lcpso/cost.hpp"
#include "lcpso/geometry.hpp"
#include "lcpso/prediction.hpp"
#include "lcpso/pso.hpp"
#include "lcpso/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lcpso::planner
{

struct PlanRequest
{
  VehicleState ego;
  double target_x{20.0};
  double target_y{0.0};
  double target_heading{0.0};
  prediction::ObservationMatrix observations;
  LaneLayout lanes;
  VehicleGeometry ego_geometry;
  std::vector<VehicleGeometry> other_geometries;
  std::size_t horizon{30};
  double dt{0.1};

  void validate() const;
};

struct PlannerConfig
{
  pso::SwarmConfig swarm;
  cost::CostWeights weights;
  cost::HeadingCost heading_cost{cost::HeadingCost::squared};
  geometry::SafetySpec safety;
  geometry::Padding padding{geometry::Padding::extrapolate};
  ControlBounds bounds;
  int max_rounds{5};
  double time_budget_ms{200.0};       // the outer loop stops after twice this
  double convergence_tolerance{0.01}; // relative improvement that still counts as progress
  double alignment_tolerance{0.2};
  bool score_refit{false};            // also offer the smoothed refit itself as a plan
  int mc_max_modifications{12};
  double mc_margin{15.0};
};

struct PlanResult
{
  std::string method;
  bool feasible{false};
  Trajectory trajectory;          // states 0..N
  std::vector<double> steering;   // N
  std::vector<double> accel;      // N
  cost::Reference reference;      // reference of the round that produced `trajectory`
  cost::CostEvaluation evaluation;          // scored against the initial plan
  prediction::PredictionMatrix predictions; // what `evaluation` was scored against
  double min_clearance{0.0};
  int steps_to_merge{0};
  int rounds{0};
  int first_feasible_round{0};  // 0 when no round produced a feasible plan
  int modifications{0};
  double target_shift{0.0};     // baseline only: longitudinal shift of the last sampled target
  double wall_ms{0.0};
  std::vector<double> round_costs;  // best-so-far total after each round
  std::vector<pso::IterationRecord> trace;
  std::string diagnostic;
};

/// Constant-speed reference whose lateral profile is the cubic from the ego lane to the target
/// lane with zero slope at both ends, ignoring other vehicles.
cost::Reference initial_plan(const PlanRequest & request, const PlannerConfig & config);

/// Iterates predict -> swarm -> cubic refit -> new reference until a feasible plan stops
/// improving, the round cap or twice the time budget is reached. Keeps the best plan seen.
PlanResult plan(
  const PlanRequest & request, const prediction::Predictor & predictor, const PlannerConfig & config);

/// Baseline: shift the longitudinal target by uniform samples in +-margin until the
/// initial-plan-style trajectory passes the safety check (modification 0 is the unshifted target).
/// When no sample is safe the result is infeasible and carries no trajectory.
PlanResult mc_modify_plan(
  const PlanRequest & request, const prediction::Predictor & predictor, const PlannerConfig & config,
  std::uint64_t seed);

/// First index after which every point stays within `tolerance` of y_c; the last index
/// (horizon length) when the trajectory never settles.
int steps_to_merge(const Trajectory & traj, double lane_center_y, double tolerance);

}  // namespace lcpso::planner

#endif  // LCPSO__PLANNER_HPP_
