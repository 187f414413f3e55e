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

#ifndef LCPSO__PSO_HPP_
#define LCPSO__PSO_HPP_

#include "lcpso/cost.hpp"
#include "lcpso/geometry.hpp"
#include "lcpso/prediction.hpp"
#include "lcpso/types.hpp"

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace lcpso::pso
{

struct SwarmConfig
{
  int particles{2};             // S_p
  int iterations{40};           // I_p
  double inertia_start{0.9};
  double inertia_end{0.4};
  double c1{2.0};
  double c2{2.0};
  double init_position_range{0.02};  // half width around the reference steering [rad]
  double init_velocity_range{0.007}; // [rad/iteration]
  double collision_boost{2.0};
  double velocity_limit{0.0};        // |v| clamp per element; 0 disables
  bool random_per_dimension{false};
  int predict_every{1};              // re-query period in iterations; 0 = never inside a run
  bool reference_global_best{true};  // the reference steering also competes for the first p_gb
  double time_budget_ms{200.0};
  std::uint64_t seed{1};

  void validate() const;
  /// Linearly decreasing inertia for iteration `k` (0-based) of `iterations`.
  double inertia(int k) const;
};

struct Particle
{
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> best_position;
  double best_cost{std::numeric_limits<double>::infinity()};
  double cost{std::numeric_limits<double>::infinity()};
  cost::CostBreakdown terms;       // of the current position
  cost::CostBreakdown best_terms;  // of best_position
  bool last_collision{false};
};

struct Swarm
{
  std::vector<Particle> particles;
  std::vector<double> global_best_position;
  double global_best_cost{std::numeric_limits<double>::infinity()};
  cost::CostBreakdown global_best_terms;
  int global_best_particle{-1};  // -1: unset, or held by the reference steering
  std::mt19937_64 rng;
};

/// Shared, read-only inputs of one optimisation run.
struct SwarmContext
{
  VehicleState initial;
  VehicleGeometry ego_geometry;
  std::vector<VehicleGeometry> other_geometries;
  const prediction::Predictor * predictor{nullptr};
  const prediction::ObservationMatrix * observations{nullptr};
  geometry::SafetySpec safety;
  cost::CostWeights weights;
  cost::HeadingCost heading_cost{cost::HeadingCost::squared};
  geometry::Padding padding{geometry::Padding::extrapolate};
  ControlBounds bounds;
  double alignment_tolerance{0.2};
};

/// Per-iteration record for the optional trace.
struct IterationRecord
{
  int round{1};
  int iteration{0};
  std::vector<double> particle_costs;
  double global_best{0.0};
  cost::CostBreakdown global_best_terms;
};

struct SwarmResult
{
  std::vector<double> steering;
  std::vector<double> accel;
  Trajectory trajectory;
  cost::CostEvaluation evaluation;
  prediction::PredictionMatrix predictions;  // what `evaluation` was scored against
  int iterations{0};
  double wall_ms{0.0};
  bool feasible{false};
  std::string diagnostic;
  std::vector<IterationRecord> trace;
};

/// Positions uniform around the reference steering, clamped to +-max_steer; velocities uniform
/// in +-init_velocity_range; local bests at the initial positions. Costs are not evaluated.
Swarm initialize_swarm(
  const cost::Reference & reference, const SwarmConfig & config, double max_steer);

/// New velocity: inertia, cognitive and social terms with fresh random draws, scaled by
/// collision_boost when the particle's last evaluation violated the safety spec.
std::vector<double> update_velocity(
  const Particle & particle, std::span<const double> global_best, double inertia,
  const SwarmConfig & config, std::mt19937_64 & rng);

/// Rolls `steering` out with the reference accelerations and scores it.
cost::CostEvaluation score(
  std::span<const double> steering, const cost::Reference & reference,
  const geometry::ObstacleSet & obstacles, const SwarmContext & ctx, Trajectory * rollout_out);

/// Evaluates the initial positions and sets the local and global bests.
void evaluate_initial(
  Swarm & swarm, const cost::Reference & reference, const geometry::ObstacleSet & obstacles,
  const SwarmContext & ctx);

/// Scores `steering` and makes it the global best when strictly cheaper. Particles keep their
/// own local bests. Returns true when the global best changed.
bool offer_global_best(
  Swarm & swarm, std::span<const double> steering, const cost::Reference & reference,
  const geometry::ObstacleSet & obstacles, const SwarmContext & ctx);

/// One pass over the swarm: velocity and position updates, clamping, rollout, evaluation and
/// best updates in particle order. Propagation failures give that particle an infinite cost.
void step_swarm(
  Swarm & swarm, const cost::Reference & reference, const geometry::ObstacleSet & obstacles,
  const SwarmContext & ctx, const SwarmConfig & config, double inertia);

/// Feasible when clear of every vehicle, inside the road and aligned with the target lane.
bool is_feasible(const cost::CostEvaluation & e, double alignment_tolerance);

/// Runs the swarm until the iteration cap or the time budget, re-querying the predictor with the
/// global-best plan every `predict_every` iterations.
SwarmResult run(
  const cost::Reference & reference, const SwarmContext & ctx, const SwarmConfig & config);

}  // namespace lcpso::pso

#endif  // LCPSO__PSO_HPP_
