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

#include "lcpso/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace lcpso::geometry
{

Vec2 Footprint::circle(int p) const
{
  return {center.x + p * offset * std::cos(heading), center.y + p * offset * std::sin(heading)};
}

Footprint make_footprint(double x, double y, double heading, const VehicleGeometry & geom)
{
  return {{x, y}, heading, geom.half_length - geom.half_width, geom.half_width};
}

double pairwise_distance(const Footprint & ego, const Footprint & other)
{
  double best = std::numeric_limits<double>::infinity();
  for (int p = -1; p <= 1; ++p) {
    const Vec2 a = ego.circle(p);
    for (int q = -1; q <= 1; ++q) {
      const Vec2 b = other.circle(q);
      best = std::min(best, std::hypot(a.x - b.x, a.y - b.y));
    }
  }
  return best - (ego.radius + other.radius);
}

bool is_safe(double clearance, const SafetySpec & spec) { return clearance >= spec.epsilon; }

std::vector<double> estimate_headings(std::span<const Vec2> points, double fallback)
{
  if (points.size() < 2) {
    throw ContractError("estimate_headings: need at least two points");
  }
  std::vector<double> out(points.size());
  double prev = fallback;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double dx = points[i + 1].x - points[i].x;
    const double dy = points[i + 1].y - points[i].y;
    if (dx != 0.0 || dy != 0.0) {
      prev = std::atan2(dy, dx);
    }
    out[i] = prev;
  }
  out.back() = out[points.size() - 2];
  return out;
}

std::vector<Vec2> pad_track(std::span<const Vec2> track, std::size_t steps, Padding padding)
{
  if (track.empty()) {
    throw ContractError("pad_track: empty prediction track");
  }
  std::vector<Vec2> out(track.begin(), track.end());
  Vec2 delta{0.0, 0.0};
  if (padding == Padding::extrapolate && track.size() >= 2) {
    const auto & a = track[track.size() - 2];
    const auto & b = track.back();
    delta = {b.x - a.x, b.y - a.y};
  }
  while (out.size() < steps) {
    const Vec2 last = out.back();
    out.push_back({last.x + delta.x, last.y + delta.y});
  }
  return out;
}

ObstacleSet prepare_obstacles(
  const std::vector<std::vector<Vec2>> & tracks, std::span<const VehicleGeometry> geoms,
  std::size_t steps, Padding padding)
{
  if (geoms.size() != tracks.size()) {
    throw ContractError(
      "prepare_obstacles: " + std::to_string(tracks.size()) + " tracks but " +
      std::to_string(geoms.size()) + " geometries");
  }
  ObstacleSet set;
  set.steps = steps;
  set.tracks.reserve(tracks.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    auto padded = pad_track(tracks[i], std::max(steps, tracks[i].size()), padding);
    std::vector<double> headings;
    if (padded.size() >= 2) {
      headings = estimate_headings(padded);
    } else {
      headings.assign(padded.size(), 0.0);
    }
    std::vector<Footprint> fps;
    fps.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      fps.push_back(make_footprint(padded[t].x, padded[t].y, headings[t], geoms[i]));
    }
    set.tracks.push_back(std::move(fps));
  }
  return set;
}

Clearance min_clearance(std::span<const Footprint> ego, const ObstacleSet & obstacles)
{
  if (ego.empty()) {
    throw ContractError("min_clearance: empty ego trajectory");
  }
  Clearance result;
  const std::size_t steps = std::min(ego.size(), obstacles.steps);
  for (std::size_t i = 0; i < obstacles.tracks.size(); ++i) {
    const auto & track = obstacles.tracks[i];
    for (std::size_t t = 0; t < steps; ++t) {
      const double d = pairwise_distance(ego[t], track[t]);
      if (d < result.distance) {
        result = {d, t, static_cast<int>(i)};
      }
    }
  }
  return result;
}

Clearance min_clearance(
  std::span<const VehicleState> ego, const VehicleGeometry & ego_geom,
  const std::vector<std::vector<Vec2>> & others, std::span<const VehicleGeometry> other_geoms,
  Padding padding)
{
  if (ego.empty()) {
    throw ContractError("min_clearance: empty ego trajectory");
  }
  std::vector<Footprint> fps;
  fps.reserve(ego.size());
  for (const auto & s : ego) {
    fps.push_back(make_footprint(s.x, s.y, s.psi, ego_geom));
  }
  return min_clearance(fps, prepare_obstacles(others, other_geoms, ego.size(), padding));
}

}  // namespace lcpso::geometry
