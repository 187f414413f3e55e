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

#include "lcpso/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace lcpso::prediction
{

void ObservationMatrix::validate() const
{
  const std::size_t n = steps();
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    if (tracks[i].size() != n) {
      throw ContractError(
        "observation matrix is not rectangular: vehicle " + std::to_string(i) + " has " +
        std::to_string(tracks[i].size()) + " observations, expected " + std::to_string(n));
    }
  }
}

PredictionMatrix constant_velocity_predict(
  const ObservationMatrix & obs, const Trajectory & /*ego_plan*/, std::size_t horizon)
{
  obs.validate();
  if (!obs.tracks.empty() && obs.steps() < 2) {
    throw ContractError("constant velocity prediction needs at least two observations");
  }
  PredictionMatrix out;
  out.dt = obs.dt;
  out.tracks.reserve(obs.vehicles());
  for (const auto & track : obs.tracks) {
    const Vec2 last = track.back();
    const Vec2 prev = track[track.size() - 2];
    const Vec2 d{last.x - prev.x, last.y - prev.y};
    std::vector<Vec2> pred;
    pred.reserve(horizon);
    for (std::size_t k = 1; k <= horizon; ++k) {
      pred.push_back({last.x + static_cast<double>(k) * d.x, last.y + static_cast<double>(k) * d.y});
    }
    out.tracks.push_back(std::move(pred));
  }
  return out;
}

PredictionMatrix ConstantVelocityPredictor::predict(
  const ObservationMatrix & obs, const Trajectory & ego_plan) const
{
  return constant_velocity_predict(obs, ego_plan, horizon_);
}

double idm_acceleration(double v, double gap, double lead_speed, const IdmParams & p)
{
  const double free_term = 1.0 - std::pow(v / p.desired_speed, p.exponent);
  if (!std::isfinite(gap)) {
    return p.max_accel * free_term;
  }
  const double s = std::max(gap, 0.01);
  const double dv = v - lead_speed;
  const double s_star =
    p.min_gap +
    std::max(0.0, v * p.time_headway + v * dv / (2.0 * std::sqrt(p.max_accel * p.comfortable_decel)));
  return p.max_accel * (free_term - (s_star / s) * (s_star / s));
}

namespace
{

// One road user in the rollout. The ego (if present) is scripted from its plan.
struct Agent
{
  double x{0.0};
  double y{0.0};
  double v{0.0};
  double half_length{2.5};
  double half_width{1.0};
  int lane{0};
  int target_lane{0};
  double lateral_speed{0.0};
  bool scripted{false};
};

class TrafficRollout
{
public:
  TrafficRollout(const TrafficModel & model, std::vector<Agent> agents)
  : model_(model), agents_(std::move(agents))
  {
  }

  std::vector<Agent> & agents() { return agents_; }

  // Body overlap, or a lane change towards `lane` already under way.
  bool occupies(const Agent & a, int lane) const
  {
    return a.target_lane == lane ||
           std::abs(a.y - model_.lanes.center(lane)) < 0.5 * model_.lanes.lane_width + a.half_width;
  }

  bool shares_lane(const Agent & a, const Agent & b) const
  {
    for (int lane = 0; lane < model_.lanes.lane_count; ++lane) {
      if (occupies(a, lane) && occupies(b, lane)) {
        return true;
      }
    }
    return false;
  }

  static double gap(const Agent & rear, const Agent & front)
  {
    return front.x - rear.x - front.half_length - rear.half_length;
  }

  // Nearest agent ahead of `self` occupying `lane` (or any lane `self` occupies when lane < 0).
  std::optional<std::size_t> leader(std::size_t self, int lane, const Agent & probe) const
  {
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < agents_.size(); ++j) {
      if (j == self) {
        continue;
      }
      const auto & o = agents_[j];
      const bool in_lane = lane < 0 ? shares_lane(probe, o) : occupies(o, lane);
      if (!in_lane || o.x <= probe.x) {
        continue;
      }
      if (!best || o.x < agents_[*best].x) {
        best = j;
      }
    }
    return best;
  }

  std::optional<std::size_t> follower(std::size_t self, int lane, const Agent & probe) const
  {
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < agents_.size(); ++j) {
      if (j == self) {
        continue;
      }
      const auto & o = agents_[j];
      const bool in_lane = lane < 0 ? shares_lane(probe, o) : occupies(o, lane);
      if (!in_lane || o.x > probe.x) {
        continue;
      }
      if (!best || o.x > agents_[*best].x) {
        best = j;
      }
    }
    return best;
  }

  double accel_behind(const Agent & me, std::optional<std::size_t> lead) const
  {
    if (!lead) {
      return idm_acceleration(me.v, std::numeric_limits<double>::infinity(), 0.0, model_.idm);
    }
    const auto & l = agents_[*lead];
    return idm_acceleration(me.v, gap(me, l), l.v, model_.idm);
  }

  double current_accel(std::size_t i) const
  {
    return accel_behind(agents_[i], leader(i, -1, agents_[i]));
  }

  // Acceleration of `rear` if `front` were its leader.
  double accel_if_following(const Agent & rear, const Agent & front) const
  {
    return idm_acceleration(rear.v, gap(rear, front), front.v, model_.idm);
  }

  void consider_lane_change(std::size_t i, const std::vector<double> & accel)
  {
    auto & me = agents_[i];
    const auto & mobil = model_.mobil;
    double best_incentive = mobil.threshold;
    int best_lane = -1;

    const auto old_follower = follower(i, me.lane, me);
    const auto old_leader = leader(i, me.lane, me);

    for (int candidate : {me.lane - 1, me.lane + 1}) {
      if (candidate < 0 || candidate >= model_.lanes.lane_count) {
        continue;
      }
      Agent moved = me;
      moved.y = model_.lanes.center(candidate);
      const auto new_leader = leader(i, candidate, moved);
      const auto new_follower = follower(i, candidate, moved);

      if (new_leader && gap(moved, agents_[*new_leader]) <= 0.0) {
        continue;
      }
      double new_follower_gain = 0.0;
      if (new_follower) {
        const auto & n = agents_[*new_follower];
        if (gap(n, moved) <= 0.0) {
          continue;
        }
        const double a_n_new = accel_if_following(n, moved);
        if (a_n_new < -mobil.safe_decel) {
          continue;
        }
        new_follower_gain = a_n_new - accel[*new_follower];
      }
      double old_follower_gain = 0.0;
      if (old_follower && old_follower != new_follower) {
        const auto & o = agents_[*old_follower];
        const double a_o_new =
          old_leader ? accel_if_following(o, agents_[*old_leader])
                     : accel_behind(o, std::nullopt);
        old_follower_gain = a_o_new - accel[*old_follower];
      }
      const double a_c_new = accel_behind(moved, new_leader);
      const double incentive =
        a_c_new - accel[i] + mobil.politeness * (new_follower_gain + old_follower_gain);
      if (incentive > best_incentive) {
        best_incentive = incentive;
        best_lane = candidate;
      }
    }

    if (best_lane >= 0) {
      me.target_lane = best_lane;
      me.lateral_speed =
        (model_.lanes.center(best_lane) - me.y) / std::max(mobil.lane_change_duration, 1e-3);
    }
  }

  void advance(double dt, const std::vector<double> & accel)
  {
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      auto & a = agents_[i];
      if (a.scripted) {
        continue;
      }
      const double acc = accel[i];
      const double v_next = a.v + acc * dt;
      if (v_next < 0.0) {
        // stop within the step
        a.x += acc < 0.0 ? -0.5 * a.v * a.v / acc : 0.0;
        a.v = 0.0;
      } else {
        a.x += a.v * dt + 0.5 * acc * dt * dt;
        a.v = v_next;
      }
      if (a.target_lane != a.lane) {
        const double goal = model_.lanes.center(a.target_lane);
        a.y += a.lateral_speed * dt;
        if ((a.lateral_speed >= 0.0 && a.y >= goal) || (a.lateral_speed < 0.0 && a.y <= goal)) {
          a.y = goal;
          a.lane = a.target_lane;
          a.lateral_speed = 0.0;
        }
      }
    }
  }

private:
  const TrafficModel & model_;
  std::vector<Agent> agents_;
};

}  // namespace

PredictionMatrix idm_mobil_predict(
  const ObservationMatrix & obs, const Trajectory & ego_plan, const TrafficModel & model,
  std::size_t horizon)
{
  obs.validate();
  const std::size_t n = obs.vehicles();
  if (n > 0 && obs.steps() < 2) {
    throw ContractError("IDM prediction needs at least two observations per vehicle");
  }
  if (model.geometries.size() != n) {
    throw ContractError(
      "IDM prediction: " + std::to_string(n) + " observed vehicles but " +
      std::to_string(model.geometries.size()) + " geometries");
  }
  const double dt = obs.dt;
  if (!(dt > 0.0)) {
    throw ContractError("IDM prediction: observation dt must be positive");
  }

  std::vector<Agent> agents;
  agents.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const auto & track = obs.tracks[i];
    const Vec2 last = track.back();
    const Vec2 prev = track[track.size() - 2];
    const int lane = model.lanes.lane_of(last.y);
    if (lane < 0) {
      throw ContractError(
        "IDM prediction: vehicle " + std::to_string(i) + " at y=" + std::to_string(last.y) +
        " has no lane assignment");
    }
    Agent a;
    a.x = last.x;
    a.y = last.y;
    a.v = std::max(0.0, (last.x - prev.x) / dt);
    a.half_length = model.geometries[i].half_length;
    a.half_width = model.geometries[i].half_width;
    a.lane = lane;
    a.target_lane = lane;
    agents.push_back(a);
  }
  const bool has_ego = !ego_plan.empty();
  if (has_ego) {
    Agent ego;
    ego.scripted = true;
    ego.half_length = model.ego_geometry.half_length;
    ego.half_width = model.ego_geometry.half_width;
    agents.push_back(ego);
  }

  TrafficRollout sim(model, std::move(agents));
  PredictionMatrix out;
  out.dt = dt;
  out.tracks.assign(n, {});
  for (auto & t : out.tracks) {
    t.reserve(horizon);
  }

  std::vector<double> accel(n + (has_ego ? 1 : 0), 0.0);
  for (std::size_t k = 0; k < horizon; ++k) {
    if (has_ego) {
      const auto & s = ego_plan.states[std::min(k, ego_plan.states.size() - 1)];
      auto & ego = sim.agents().back();
      ego.x = s.x;
      ego.y = s.y;
      ego.v = s.v;
      const int lane = model.lanes.lane_of(s.y);
      ego.lane = lane < 0 ? 0 : lane;
      ego.target_lane = ego.lane;
    }
    for (std::size_t i = 0; i < accel.size(); ++i) {
      accel[i] = sim.current_accel(i);
    }
    if (model.mobil.enabled) {
      for (std::size_t i = 0; i < n; ++i) {
        auto & a = sim.agents()[i];
        if (a.target_lane == a.lane) {
          sim.consider_lane_change(i, accel);
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        accel[i] = sim.current_accel(i);
      }
    }
    sim.advance(dt, accel);
    for (std::size_t i = 0; i < n; ++i) {
      out.tracks[i].push_back({sim.agents()[i].x, sim.agents()[i].y});
    }
  }
  return out;
}

PredictionMatrix IdmMobilPredictor::predict(
  const ObservationMatrix & obs, const Trajectory & ego_plan) const
{
  return idm_mobil_predict(obs, ego_plan, model_, horizon_);
}

PredictionMatrix CallbackPredictor::predict(
  const ObservationMatrix & obs, const Trajectory & ego_plan) const
{
  auto out = fn_(obs, ego_plan);
  if (out.vehicles() != obs.vehicles() || (out.vehicles() > 0 && out.steps() != horizon_)) {
    throw ContractError("predictor '" + name_ + "' returned a prediction of the wrong shape");
  }
  for (const auto & t : out.tracks) {
    if (t.size() != horizon_) {
      throw ContractError("predictor '" + name_ + "' returned a ragged prediction");
    }
  }
  return out;
}

std::vector<std::vector<Vec2>> interactive_gap_response(
  const PredictionMatrix & without_ego, const PredictionMatrix & with_ego)
{
  if (without_ego.vehicles() != with_ego.vehicles()) {
    throw ContractError("interactive_gap_response: vehicle count mismatch");
  }
  std::vector<std::vector<Vec2>> out(without_ego.vehicles());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto & a = without_ego.tracks[i];
    const auto & b = with_ego.tracks[i];
    if (a.size() != b.size()) {
      throw ContractError("interactive_gap_response: horizon mismatch for vehicle " + std::to_string(i));
    }
    out[i].reserve(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      out[i].push_back({b[k].x - a[k].x, b[k].y - a[k].y});
    }
  }
  return out;
}

}  // namespace lcpso::prediction
