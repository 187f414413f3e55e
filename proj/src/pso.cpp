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

#include "lcpso/pso.hpp"

#include "lcpso/kinematics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>

namespace lcpso::pso
{

void SwarmConfig::validate() const
{
  if (particles < 1) {
    throw ContractError("swarm: particle count must be >= 1");
  }
  if (iterations < 1) {
    throw ContractError("swarm: iteration count must be >= 1");
  }
  if (!(inertia_end > 0.0 && inertia_end <= inertia_start)) {
    throw ContractError("swarm: inertia must satisfy 0 < end <= start");
  }
  if (!(c1 > 0.0 && c2 > 0.0)) {
    throw ContractError("swarm: acceleration coefficients must be positive");
  }
  if (!(collision_boost >= 1.0)) {
    throw ContractError("swarm: collision boost must be >= 1");
  }
  if (init_position_range < 0.0 || init_velocity_range < 0.0 || velocity_limit < 0.0) {
    throw ContractError("swarm: ranges must be non-negative");
  }
  if (predict_every < 0) {
    throw ContractError("swarm: predict_every must be >= 0");
  }
}

double SwarmConfig::inertia(int k) const
{
  if (iterations <= 1) {
    return inertia_start;
  }
  const double frac = static_cast<double>(k) / static_cast<double>(iterations - 1);
  return inertia_start - (inertia_start - inertia_end) * frac;
}

Swarm initialize_swarm(
  const cost::Reference & reference, const SwarmConfig & config, double max_steer)
{
  const std::size_t n = reference.steering.size();
  Swarm swarm;
  swarm.rng.seed(config.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  swarm.particles.resize(static_cast<std::size_t>(config.particles));
  for (auto & p : swarm.particles) {
    p.position.resize(n);
    p.velocity.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      const double offset = config.init_position_range > 0.0
                              ? config.init_position_range * unit(swarm.rng)
                              : 0.0;
      p.position[k] = std::clamp(reference.steering[k] + offset, -max_steer, max_steer);
    }
    for (std::size_t k = 0; k < n; ++k) {
      p.velocity[k] =
        config.init_velocity_range > 0.0 ? config.init_velocity_range * unit(swarm.rng) : 0.0;
    }
    p.best_position = p.position;
  }
  return swarm;
}

std::vector<double> update_velocity(
  const Particle & particle, std::span<const double> global_best, double inertia,
  const SwarmConfig & config, std::mt19937_64 & rng)
{
  const std::size_t n = particle.position.size();
  if (particle.velocity.size() != n || particle.best_position.size() != n || global_best.size() != n) {
    throw ContractError("update_velocity: shape mismatch");
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double r1 = 0.0;
  double r2 = 0.0;
  if (!config.random_per_dimension) {
    r1 = unit(rng);
    r2 = unit(rng);
  }
  const double boost = particle.last_collision ? config.collision_boost : 1.0;
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (config.random_per_dimension) {
      r1 = unit(rng);
      r2 = unit(rng);
    }
    const double x = particle.position[k];
    double vk = inertia * particle.velocity[k] + config.c1 * r1 * (particle.best_position[k] - x) +
                config.c2 * r2 * (global_best[k] - x);
    vk *= boost;
    if (config.velocity_limit > 0.0) {
      vk = std::clamp(vk, -config.velocity_limit, config.velocity_limit);
    }
    v[k] = vk;
  }
  return v;
}

cost::CostEvaluation score(
  std::span<const double> steering, const cost::Reference & reference,
  const geometry::ObstacleSet & obstacles, const SwarmContext & ctx, Trajectory * rollout_out)
{
  auto traj = kinematics::rollout(
    ctx.initial, steering, reference.accel, ctx.ego_geometry, reference.dt);
  cost::EvaluationContext ectx;
  ectx.obstacles = &obstacles;
  ectx.ego_geometry = ctx.ego_geometry;
  ectx.safety = ctx.safety;
  ectx.weights = ctx.weights;
  ectx.heading_cost = ctx.heading_cost;
  auto eval = cost::evaluate(traj, steering, reference, ectx);
  if (rollout_out != nullptr) {
    *rollout_out = std::move(traj);
  }
  return eval;
}

namespace
{

// Cost of one particle position; failures become +inf so the particle never becomes a best.
double safe_score(
  Particle & p, const cost::Reference & reference, const geometry::ObstacleSet & obstacles,
  const SwarmContext & ctx)
{
  try {
    const auto e = score(p.position, reference, obstacles, ctx, nullptr);
    p.last_collision = e.collision;
    p.terms = e.terms;
    return e.terms.total;
  } catch (const PropagationError &) {
    p.last_collision = true;
    p.terms = cost::CostBreakdown{};
    p.terms.total = std::numeric_limits<double>::infinity();
    return p.terms.total;
  }
}

}  // namespace

void evaluate_initial(
  Swarm & swarm, const cost::Reference & reference, const geometry::ObstacleSet & obstacles,
  const SwarmContext & ctx)
{
  for (std::size_t i = 0; i < swarm.particles.size(); ++i) {
    auto & p = swarm.particles[i];
    p.cost = safe_score(p, reference, obstacles, ctx);
    p.best_position = p.position;
    p.best_cost = p.cost;
    p.best_terms = p.terms;
    if (swarm.global_best_particle < 0 || p.best_cost < swarm.global_best_cost) {
      swarm.global_best_cost = p.best_cost;
      swarm.global_best_terms = p.best_terms;
      swarm.global_best_position = p.best_position;
      swarm.global_best_particle = static_cast<int>(i);
    }
  }
}

bool offer_global_best(
  Swarm & swarm, std::span<const double> steering, const cost::Reference & reference,
  const geometry::ObstacleSet & obstacles, const SwarmContext & ctx)
{
  cost::CostEvaluation e;
  try {
    e = score(steering, reference, obstacles, ctx, nullptr);
  } catch (const PropagationError &) {
    return false;
  }
  if (!(e.terms.total < swarm.global_best_cost)) {
    return false;
  }
  swarm.global_best_cost = e.terms.total;
  swarm.global_best_terms = e.terms;
  swarm.global_best_position.assign(steering.begin(), steering.end());
  swarm.global_best_particle = -1;
  return true;
}

void step_swarm(
  Swarm & swarm, const cost::Reference & reference, const geometry::ObstacleSet & obstacles,
  const SwarmContext & ctx, const SwarmConfig & config, double inertia)
{
  const double max_steer = ctx.bounds.max_steer;
  for (std::size_t i = 0; i < swarm.particles.size(); ++i) {
    auto & p = swarm.particles[i];
    p.velocity = update_velocity(p, swarm.global_best_position, inertia, config, swarm.rng);
    for (std::size_t k = 0; k < p.position.size(); ++k) {
      p.position[k] = std::clamp(p.position[k] + p.velocity[k], -max_steer, max_steer);
    }
    p.cost = safe_score(p, reference, obstacles, ctx);
    if (p.cost < p.best_cost) {
      p.best_cost = p.cost;
      p.best_terms = p.terms;
      p.best_position = p.position;
      if (p.best_cost < swarm.global_best_cost) {
        swarm.global_best_cost = p.best_cost;
        swarm.global_best_terms = p.best_terms;
        swarm.global_best_position = p.best_position;
        swarm.global_best_particle = static_cast<int>(i);
      }
    }
  }
}

bool is_feasible(const cost::CostEvaluation & e, double alignment_tolerance)
{
  return !e.collision && !e.lane_violation && e.terminal_offset <= alignment_tolerance;
}

SwarmResult run(
  const cost::Reference & reference, const SwarmContext & ctx, const SwarmConfig & config)
{
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  const auto elapsed_ms = [&] {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };

  config.validate();
  reference.validate();
  const std::size_t n = reference.size();

  const auto query = [&](const Trajectory & plan) {
    if (ctx.predictor == nullptr || ctx.observations == nullptr) {
      return prediction::PredictionMatrix{};
    }
    return ctx.predictor->predict(*ctx.observations, plan);
  };
  const auto prepare = [&](const prediction::PredictionMatrix & pred) {
    return geometry::prepare_obstacles(pred.tracks, ctx.other_geometries, n, ctx.padding);
  };

  SwarmResult result;
  auto predictions = query(reference.as_trajectory(ctx.initial));
  auto obstacles = prepare(predictions);

  Swarm swarm = initialize_swarm(reference, config, ctx.bounds.max_steer);
  evaluate_initial(swarm, reference, obstacles, ctx);
  if (config.reference_global_best) {
    std::vector<double> clamped = reference.steering;
    for (double & d : clamped) {
      d = std::clamp(d, -ctx.bounds.max_steer, ctx.bounds.max_steer);
    }
    offer_global_best(swarm, clamped, reference, obstacles, ctx);
  }

  const auto record = [&](int iteration) {
    IterationRecord r;
    r.iteration = iteration;
    r.global_best = swarm.global_best_cost;
    r.global_best_terms = swarm.global_best_terms;
    r.particle_costs.reserve(swarm.particles.size());
    for (const auto & p : swarm.particles) {
      r.particle_costs.push_back(p.cost);
    }
    result.trace.push_back(std::move(r));
  };
  record(0);

  const bool requery = config.predict_every > 0 && ctx.predictor != nullptr &&
                       ctx.predictor->interactive();
  int completed = 0;
  for (int it = 1; it <= config.iterations; ++it) {
    if (elapsed_ms() >= config.time_budget_ms) {
      break;
    }
    if (requery && it > 1 && (it - 1) % config.predict_every == 0) {
      const auto plan = kinematics::rollout(
        ctx.initial, swarm.global_best_position, reference.accel, ctx.ego_geometry, reference.dt);
      predictions = query(plan);
      obstacles = prepare(predictions);
    }
    step_swarm(swarm, reference, obstacles, ctx, config, config.inertia(it - 1));
    ++completed;
    record(it);
  }

  result.iterations = completed;
  result.steering = swarm.global_best_position;
  result.accel = reference.accel;
  result.trajectory = kinematics::rollout(
    ctx.initial, result.steering, result.accel, ctx.ego_geometry, reference.dt);
  if (requery) {
    predictions = query(result.trajectory);
    obstacles = prepare(predictions);
  }
  result.predictions = predictions;
  result.evaluation = score(result.steering, reference, obstacles, ctx, nullptr);
  result.feasible = is_feasible(result.evaluation, ctx.alignment_tolerance);
  if (completed == 0) {
    result.feasible = false;
    result.diagnostic = "time budget exhausted before the first iteration";
  }
  result.wall_ms = elapsed_ms();
  return result;
}

}  // namespace lcpso::pso
