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

#ifndef LCPSO__SMOOTHING_HPP_
#define LCPSO__SMOOTHING_HPP_

#include "lcpso/cost.hpp"
#include "lcpso/types.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace lcpso::smoothing
{

/// kappa(l) = b3 l^3 + b2 l^2 + b1 l + b0 with l = x - l_start, defined on [l_start, l_end].
/// Past l_end the curve continues flat at kappa(l_end); before l_start it holds kappa(l_start).
struct CubicCurve
{
  std::array<double, 4> coeffs{};  // b0..b3
  double l_start{0.0};
  double l_end{0.0};

  double value(double x) const;
  double slope(double x) const;
  /// Polynomial value without the flat extension.
  double raw_value(double x) const;
  double raw_slope(double x) const;
};

/// Anchor points for the fit: first, last, the interior point of steepest lateral slope, and the
/// midpoint between it and the farther endpoint. A trajectory with no lateral motion gets two
/// evenly spaced interior anchors. Returns nullopt when x is not strictly increasing.
std::optional<std::vector<Vec2>> select_waypoints(std::span<const Vec2> points);

struct CubicFit
{
  CubicCurve curve;
  std::vector<double> residuals;  // kappa(x) - y at the interior anchors
};

/// Least-squares cubic through 3-4 anchors with the first and last anchor interpolated exactly
/// and the slope at the last anchor pinned to `terminal_slope`. Throws ContractError when the
/// anchors are not strictly increasing in x.
CubicFit fit_cubic(std::span<const Vec2> anchors, double terminal_slope = 0.0);

/// Rebuilds an N-step reference from the curve. x advances by v * dt * cos(heading) per step,
/// y follows the curve, speeds are copied from `speed_source` (states 0..N), headings come from
/// the curve slope and steering/acceleration from inverting the bicycle model.
cost::Reference regenerate_reference(
  const CubicCurve & curve, const Trajectory & speed_source, std::size_t n, double dt,
  const VehicleGeometry & geom, const cost::Reference & frame);

/// Largest |second difference| of a sequence; 0 for fewer than three values.
double max_second_difference(std::span<const double> values);

}  // namespace lcpso::smoothing

#endif  // LCPSO__SMOOTHING_HPP_
