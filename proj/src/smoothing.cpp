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

#include "lcpso/smoothing.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace lcpso::smoothing
{

double CubicCurve::raw_value(double x) const
{
  const double l = x - l_start;
  return ((coeffs[3] * l + coeffs[2]) * l + coeffs[1]) * l + coeffs[0];
}

double CubicCurve::raw_slope(double x) const
{
  const double l = x - l_start;
  return (3.0 * coeffs[3] * l + 2.0 * coeffs[2]) * l + coeffs[1];
}

double CubicCurve::value(double x) const
{
  return raw_value(std::clamp(x, l_start, l_end));
}

double CubicCurve::slope(double x) const
{
  if (x > l_end) {
    return 0.0;
  }
  if (x < l_start) {
    return raw_slope(l_start);
  }
  return raw_slope(x);
}

std::optional<std::vector<Vec2>> select_waypoints(std::span<const Vec2> points)
{
  const std::size_t n = points.size();
  if (n < 4) {
    throw ContractError("select_waypoints: need at least four points");
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(points[i].x > points[i - 1].x)) {
      return std::nullopt;
    }
  }
  if (n == 4) {
    return std::vector<Vec2>(points.begin(), points.end());
  }

  const std::size_t last = n - 1;
  std::size_t steepest = 0;
  double steepest_rate = 0.0;
  for (std::size_t i = 1; i < last; ++i) {
    const double rate =
      std::abs(points[i + 1].y - points[i - 1].y) / (points[i + 1].x - points[i - 1].x);
    if (rate > steepest_rate) {
      steepest_rate = rate;
      steepest = i;
    }
  }

  std::size_t a = 0;
  std::size_t b = 0;
  if (steepest_rate < 1e-9) {
    a = std::max<std::size_t>(1, (last + 1) / 3);
    b = std::min(last - 1, std::max(a + 1, (2 * last + 1) / 3));
  } else {
    a = steepest;
    b = (steepest >= last - steepest) ? steepest / 2 : (steepest + last) / 2;
    if (b == a || b == 0 || b == last) {
      b = (a + 1 < last) ? a + 1 : a - 1;
    }
    if (b < a) {
      std::swap(a, b);
    }
  }
  return std::vector<Vec2>{points[0], points[a], points[b], points[last]};
}

CubicFit fit_cubic(std::span<const Vec2> anchors, double terminal_slope)
{
  if (anchors.size() < 3 || anchors.size() > 4) {
    throw ContractError("fit_cubic: expects three or four anchors");
  }
  for (std::size_t i = 1; i < anchors.size(); ++i) {
    if (!(anchors[i].x > anchors[i - 1].x)) {
      throw ContractError("fit_cubic: anchors must have strictly increasing x");
    }
  }

  // Solve in u = (x - x0) / L so the system stays well conditioned for long spans.
  const double x0 = anchors.front().x;
  const double span = anchors.back().x - x0;
  const std::size_t interior = anchors.size() - 2;

  Eigen::MatrixXd a(interior, 4);
  Eigen::VectorXd y(interior);
  for (std::size_t i = 0; i < interior; ++i) {
    const double u = (anchors[i + 1].x - x0) / span;
    a.row(static_cast<Eigen::Index>(i)) << 1.0, u, u * u, u * u * u;
    y(static_cast<Eigen::Index>(i)) = anchors[i + 1].y;
  }
  Eigen::Matrix<double, 3, 4> c;
  c << 1.0, 0.0, 0.0, 0.0,
       1.0, 1.0, 1.0, 1.0,
       0.0, 1.0, 2.0, 3.0;
  Eigen::Vector3d d(anchors.front().y, anchors.back().y, terminal_slope * span);

  Eigen::Matrix<double, 7, 7> kkt = Eigen::Matrix<double, 7, 7>::Zero();
  kkt.topLeftCorner<4, 4>() = 2.0 * a.transpose() * a;
  kkt.topRightCorner<4, 3>() = c.transpose();
  kkt.bottomLeftCorner<3, 4>() = c;
  Eigen::Matrix<double, 7, 1> rhs;
  rhs.head<4>() = 2.0 * a.transpose() * y;
  rhs.tail<3>() = d;

  Eigen::FullPivLU<Eigen::Matrix<double, 7, 7>> lu(kkt);
  if (!lu.isInvertible()) {
    throw ContractError("fit_cubic: singular constraint system");
  }
  const Eigen::Matrix<double, 7, 1> sol = lu.solve(rhs);

  CubicFit fit;
  fit.curve.l_start = x0;
  fit.curve.l_end = anchors.back().x;
  double scale = 1.0;
  for (int k = 0; k < 4; ++k) {
    fit.curve.coeffs[static_cast<std::size_t>(k)] = sol(k) / scale;
    scale *= span;
  }
  for (std::size_t i = 1; i + 1 < anchors.size(); ++i) {
    fit.residuals.push_back(fit.curve.raw_value(anchors[i].x) - anchors[i].y);
  }
  return fit;
}

cost::Reference regenerate_reference(
  const CubicCurve & curve, const Trajectory & speed_source, std::size_t n, double dt,
  const VehicleGeometry & geom, const cost::Reference & frame)
{
  if (speed_source.empty()) {
    throw ContractError("regenerate_reference: empty speed source");
  }
  if (n == 0) {
    throw ContractError("regenerate_reference: horizon must be positive");
  }
  const auto speed_at = [&](std::size_t k) {
    return speed_source.states[std::min(k, speed_source.size() - 1)].v;
  };

  cost::Reference ref;
  ref.dt = dt;
  ref.lane_center_y = frame.lane_center_y;
  ref.road_lower = frame.road_lower;
  ref.road_upper = frame.road_upper;
  ref.waypoints.reserve(n);

  std::vector<double> headings;
  std::vector<double> speeds;
  headings.reserve(n + 1);
  speeds.reserve(n + 1);

  // Headings after the start come from the curve; the start keeps the vehicle's actual heading
  // so that the inverted steering reproduces the curve from the real initial state.
  double x = speed_source.states.front().x;
  headings.push_back(speed_source.states.front().psi);
  speeds.push_back(speed_at(0));
  for (std::size_t k = 1; k <= n; ++k) {
    x += speed_at(k - 1) * dt * std::cos(k == 1 ? std::atan(curve.slope(x)) : headings.back());
    const double v = speed_at(k);
    ref.waypoints.push_back({x, curve.value(x), v});
    headings.push_back(std::atan(curve.slope(x)));
    speeds.push_back(v);
  }

  ref.heading.assign(headings.begin() + 1, headings.end());
  ref.steering = cost::steering_from_headings(headings, speeds, geom, dt);
  ref.accel.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    ref.accel[k] = (speeds[k + 1] - speeds[k]) / dt;
  }
  return ref;
}

double max_second_difference(std::span<const double> values)
{
  double m = 0.0;
  for (std::size_t i = 2; i < values.size(); ++i) {
    m = std::max(m, std::abs(values[i] - 2.0 * values[i - 1] + values[i - 2]));
  }
  return m;
}

}  // namespace lcpso::smoothing
