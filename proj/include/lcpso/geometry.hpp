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

#ifndef LCPSO__GEOMETRY_HPP_
#define LCPSO__GEOMETRY_HPP_

#include "lcpso/types.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace lcpso::geometry
{

/// Three equal circles placed at {-D, 0, +D} along the heading, D = half_length - half_width.
struct Footprint
{
  Vec2 center;
  double heading{0.0};
  double offset{0.0};  // D
  double radius{0.0};  // half width

  Vec2 circle(int p) const;
};

Footprint make_footprint(double x, double y, double heading, const VehicleGeometry & geom);

struct SafetySpec
{
  double epsilon{2.0};  // required clearance [m]
};

/// Smallest circle-to-circle distance over the nine circle pairs, minus both radii.
/// Negative when the footprints overlap.
double pairwise_distance(const Footprint & ego, const Footprint & other);

/// True iff clearance >= epsilon.
bool is_safe(double clearance, const SafetySpec & spec);

/// Forward-difference headings of a position sequence. The last heading repeats the previous
/// one; coincident neighbours reuse the prior heading (0 for a leading run).
std::vector<double> estimate_headings(std::span<const Vec2> points, double fallback = 0.0);

/// How a prediction shorter than the evaluated horizon is extended.
enum class Padding
{
  hold,         // repeat the last predicted position
  extrapolate,  // continue the last predicted displacement
};

/// Predicted footprints of surrounding vehicles, [vehicle][step].
struct ObstacleSet
{
  std::vector<std::vector<Footprint>> tracks;
  std::size_t steps{0};
};

/// Pads every track to `steps` entries and attaches finite-difference headings.
ObstacleSet prepare_obstacles(
  const std::vector<std::vector<Vec2>> & tracks, std::span<const VehicleGeometry> geoms,
  std::size_t steps, Padding padding = Padding::hold);

/// Pads a single track to `steps` entries.
std::vector<Vec2> pad_track(std::span<const Vec2> track, std::size_t steps, Padding padding);

struct Clearance
{
  double distance{std::numeric_limits<double>::infinity()};
  std::size_t step{0};
  int vehicle{-1};
};

/// Minimum pairwise distance between ego footprints and every obstacle at each common step.
/// ego[t] is compared against obstacles.tracks[i][t].
Clearance min_clearance(std::span<const Footprint> ego, const ObstacleSet & obstacles);

/// Convenience form: ego states (headings taken from the states) against raw predicted tracks
/// aligned at the same indices.
Clearance min_clearance(
  std::span<const VehicleState> ego, const VehicleGeometry & ego_geom,
  const std::vector<std::vector<Vec2>> & others, std::span<const VehicleGeometry> other_geoms,
  Padding padding = Padding::hold);

}  // namespace lcpso::geometry

#endif  // LCPSO__GEOMETRY_HPP_
