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

#include "lcpso/planner.hpp"

#include "lcpso/kinematics.hpp"
#include "lcpso/smoothing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <random>

namespace lcpso::planner
{
namespace
{
using clock = std::chrono::steady_clock;

double ms_since(clock::time_point t0)
{
  return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
}

cost::Reference empty_frame(const PlanRequest & request)
{
  cost::Reference frame;
  frame.dt = request.dt;
  frame.lane_center_y = request.target_y;
  frame.road_lower = request.lanes.lower_edge();
  frame.road_upper = request.lanes.upper_edge();
  return frame;
}

Trajectory constant_speed_source(const PlanRequest & request)
{
  Trajectory t;
  t.dt = request.dt;
  t.states.assign(request.horizon + 1, request.ego);
  return t;
}

struct Candidate
{
  Trajectory trajectory;
  std::vector<double> steering;
  std::vector<double> accel;
  cost::Reference reference;
  cost::CostEvaluation evaluation;
  prediction::PredictionMatrix predictions;
  bool feasible{false};
};

cost::EvaluationContext evaluation_context(const PlanRequest & request, const PlannerConfig & config)
{
  cost::EvaluationContext ectx;
  ectx.ego_geometry = request.ego_geometry;
  ectx.safety = config.safety;
  ectx.weights = config.weights;
  ectx.heading_cost = config.heading_cost;
  return ectx;
}

// Candidates from different rounds are compared on one yardstick: the cost against the
// initial plan.
cost::CostEvaluation score(
  const Candidate & c, const cost::Reference & yardstick, const PlanRequest & request,
  const PlannerConfig & config)
{
  return cost::evaluate(
    c.trajectory, c.steering, yardstick, c.predictions, request.other_geometries,
    evaluation_context(request, config), config.padding);
}

// Roll out a reference's own controls and score it against predictions conditioned on it.
Candidate follow_reference(
  const cost::Reference & ref, const cost::Reference & yardstick, const PlanRequest & request,
  const prediction::Predictor & predictor, const PlannerConfig & config)
{
  Candidate c;
  c.reference = ref;
  c.steering = ref.steering;
  c.accel = ref.accel;
  c.trajectory =
    kinematics::rollout(request.ego, c.steering, c.accel, request.ego_geometry, request.dt);
  c.predictions = predictor.predict(request.observations, c.trajectory);
  c.evaluation = score(c, yardstick, request, config);
  c.feasible = pso::is_feasible(c.evaluation, config.alignment_tolerance);
  return c;
}

// Rank plans: feasible beats infeasible, then lower total cost.
bool better(const Candidate & a, const PlanResult & incumbent, bool have_incumbent)
{
  if (!have_incumbent) {
    return true;
  }
  if (a.feasible != incumbent.feasible) {
    return a.feasible;
  }
  return a.evaluation.terms.total < incumbent.evaluation.terms.total;
}

void adopt(PlanResult & out, Candidate && c)
{
  out.feasible = c.feasible;
  out.trajectory = std::move(c.trajectory);
  out.steering = std::move(c.steering);
  out.accel = std::move(c.accel);
  out.reference = std::move(c.reference);
  out.evaluation = c.evaluation;
  out.predictions = std::move(c.predictions);
}

// First step that comes close to the lane center: within the alignment tolerance or a tenth
// of the initial lateral offset, whichever is looser. Swarm output often hovers just outside
// the tolerance, and fitting all the way to the horizon would stretch the lane change.
std::size_t first_arrival(
  const Trajectory & traj, double lane_center_y, double start_y, double tolerance)
{
  const double band = std::max(tolerance, 0.1 * std::abs(start_y - lane_center_y));
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (std::abs(traj.states[k].y - lane_center_y) <= band) {
      return k;
    }
  }
  return traj.size() - 1;
}

cost::Reference reference_from_raw(
  const Trajectory & traj, const PlanRequest & request, const cost::Reference & frame)
{
  std::vector<cost::Waypoint> wps;
  wps.reserve(traj.size());
  for (const auto & s : traj.states) {
    wps.push_back({s.x, s.y, s.v});
  }
  const auto controls =
    cost::reference_controls_from_waypoints(wps, request.ego_geometry, request.dt);
  cost::Reference ref = frame;
  ref.waypoints.assign(wps.begin() + 1, wps.end());
  ref.heading = controls.heading;
  ref.steering = controls.steering;
  ref.accel = controls.accel;
  return ref;
}

}  // namespace

void PlanRequest::validate() const
{
  if (horizon < 3) {
    throw ContractError("plan request: horizon must be at least 3 steps");
  }
  if (!(dt > 0.0)) {
    throw ContractError("plan request: dt must be positive");
  }
  if (!(target_x > ego.x)) {
    throw ContractError("plan request: target lies behind the ego vehicle");
  }
  ego_geometry.validate();
  for (const auto & g : other_geometries) {
    g.validate();
  }
  observations.validate();
  if (observations.vehicles() != other_geometries.size()) {
    throw ContractError("plan request: one geometry per observed vehicle required");
  }
}

cost::Reference initial_plan(const PlanRequest & request, const PlannerConfig & /*config*/)
{
  request.validate();
  const double span = request.target_x - request.ego.x;
  const double offset = request.target_y - request.ego.y;

  smoothing::CubicCurve curve;
  curve.l_start = request.ego.x;
  curve.l_end = request.target_x;
  curve.coeffs = {request.ego.y, 0.0, 3.0 * offset / (span * span), -2.0 * offset / (span * span * span)};

  return smoothing::regenerate_reference(
    curve, constant_speed_source(request), request.horizon, request.dt, request.ego_geometry,
    empty_frame(request));
}

int steps_to_merge(const Trajectory & traj, double lane_center_y, double tolerance)
{
  if (traj.empty()) {
    throw ContractError("steps_to_merge: empty trajectory");
  }
  const int last = static_cast<int>(traj.size()) - 1;
  int k = last;
  while (k >= 0 && std::abs(traj.states[static_cast<std::size_t>(k)].y - lane_center_y) <= tolerance) {
    --k;
  }
  if (k == last) {
    return last;
  }
  return k + 1;
}

PlanResult plan(
  const PlanRequest & request, const prediction::Predictor & predictor, const PlannerConfig & config)
{
  const auto t0 = clock::now();
  request.validate();
  config.weights.validate();
  config.swarm.validate();

  pso::SwarmContext ctx;
  ctx.initial = request.ego;
  ctx.ego_geometry = request.ego_geometry;
  ctx.other_geometries = request.other_geometries;
  ctx.predictor = &predictor;
  ctx.observations = &request.observations;
  ctx.safety = config.safety;
  ctx.weights = config.weights;
  ctx.heading_cost = config.heading_cost;
  ctx.padding = config.padding;
  ctx.bounds = config.bounds;
  ctx.alignment_tolerance = config.alignment_tolerance;

  PlanResult best;
  best.method = "pso";
  bool have_best = false;
  const cost::Reference frame = empty_frame(request);
  const cost::Reference initial = initial_plan(request, config);
  cost::Reference reference = initial;
  double previous_round_cost = std::numeric_limits<double>::infinity();
  const double outer_cap_ms = 2.0 * config.time_budget_ms;

  for (int round = 1; round <= config.max_rounds; ++round) {
    const double used = ms_since(t0);
    if (used >= outer_cap_ms) {
      break;
    }
    pso::SwarmConfig swarm_cfg = config.swarm;
    swarm_cfg.seed = config.swarm.seed + static_cast<std::uint64_t>(round - 1) * 0x9E3779B97F4A7C15ULL;
    swarm_cfg.time_budget_ms = std::min(config.swarm.time_budget_ms, outer_cap_ms - used);

    auto res = pso::run(reference, ctx, swarm_cfg);
    for (auto & rec : res.trace) {
      rec.round = round;
      best.trace.push_back(rec);
    }
    best.rounds = round;
    if (!res.diagnostic.empty()) {
      best.diagnostic = res.diagnostic;
    }

    Candidate raw;
    raw.trajectory = res.trajectory;
    raw.steering = res.steering;
    raw.accel = res.accel;
    raw.reference = reference;
    raw.predictions = res.predictions;
    raw.evaluation = score(raw, initial, request, config);
    raw.feasible = res.feasible;

    // Refit the swarm output. Only the part up to the merge is fitted; the regenerated
    // reference continues flat past the last anchor.
    const auto merged_at =
      first_arrival(res.trajectory, request.target_y, request.ego.y, config.alignment_tolerance);
    const std::size_t end = std::clamp<std::size_t>(merged_at, 3, res.trajectory.size() - 1);
    const auto pts = res.trajectory.positions();
    auto anchors = smoothing::select_waypoints(std::span<const Vec2>(pts.data(), end + 1));
    std::optional<cost::Reference> refit;
    if (anchors) {
      // The swarm may stop short of the lane center; the refit always ends on it.
      anchors->back().y = request.target_y;
      try {
        const auto fit = smoothing::fit_cubic(*anchors, std::tan(request.target_heading));
        refit = smoothing::regenerate_reference(
          fit.curve, res.trajectory, request.horizon, request.dt, request.ego_geometry, frame);
      } catch (const ContractError &) {
      }
    }

    double round_cost = raw.evaluation.terms.total;
    bool round_feasible = raw.feasible;
    if (better(raw, best, have_best)) {
      adopt(best, std::move(raw));
      have_best = true;
    }
    if (refit && !config.score_refit) {
      reference = *refit;
    } else if (refit) {
      auto smooth = follow_reference(*refit, initial, request, predictor, config);
      if (smooth.feasible || !round_feasible) {
        round_cost = round_feasible ? std::min(round_cost, smooth.evaluation.terms.total)
                                    : smooth.evaluation.terms.total;
      }
      round_feasible = round_feasible || smooth.feasible;
      if (better(smooth, best, have_best)) {
        adopt(best, std::move(smooth));
      }
      // The next swarm starts from the best plan so far rather than from a refit that lost.
      reference = best.reference;
    } else {
      reference = reference_from_raw(res.trajectory, request, frame);
      best.diagnostic = "smoothing skipped in round " + std::to_string(round);
    }
    best.round_costs.push_back(best.evaluation.terms.total);
    if (round_feasible && best.first_feasible_round == 0) {
      best.first_feasible_round = round;
    }

    const double gain = previous_round_cost - round_cost;
    if (round_feasible && gain < config.convergence_tolerance * std::abs(previous_round_cost)) {
      break;
    }
    previous_round_cost = round_cost;
  }

  best.min_clearance = best.evaluation.clearance.distance;
  best.steps_to_merge = steps_to_merge(best.trajectory, request.target_y, config.alignment_tolerance);
  best.wall_ms = ms_since(t0);
  return best;
}

PlanResult mc_modify_plan(
  const PlanRequest & request, const prediction::Predictor & predictor, const PlannerConfig & config,
  std::uint64_t seed)
{
  const auto t0 = clock::now();
  request.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> shift(-config.mc_margin, config.mc_margin);
  const cost::Reference yardstick = initial_plan(request, config);

  PlanResult out;
  out.method = "mc";
  for (int m = 0; m <= config.mc_max_modifications; ++m) {
    PlanRequest candidate = request;
    if (m > 0) {
      candidate.target_x = request.target_x + shift(rng);
    }
    out.modifications = m;
    if (!(candidate.target_x > request.ego.x)) {
      continue;
    }
    auto c = follow_reference(initial_plan(candidate, config), yardstick, request, predictor, config);
    const bool ok = c.feasible;
    adopt(out, std::move(c));
    out.target_shift = candidate.target_x - request.target_x;
    if (ok) {
      break;
    }
  }
  out.rounds = 1;
  out.min_clearance = out.evaluation.clearance.distance;
  if (out.feasible) {
    out.steps_to_merge = steps_to_merge(out.trajectory, request.target_y, config.alignment_tolerance);
  } else {
    // Only safe samples are ever handed out; the last rejected one is kept for its scores.
    out.trajectory.states.clear();
    out.steering.clear();
    out.accel.clear();
    out.steps_to_merge = static_cast<int>(request.horizon);
    out.diagnostic = "no safe target within " + std::to_string(config.mc_max_modifications) +
                     " modifications";
  }
  out.wall_ms = ms_since(t0);
  return out;
}

}  // namespace lcpso::planner
