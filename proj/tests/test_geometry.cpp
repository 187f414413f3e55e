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
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace lcpso;
using geometry::Footprint;

namespace
{

const VehicleGeometry kGeom{};  // 5 m x 2 m

// Exhaustive enumeration of the nine circle pairs.
double brute_force(const Footprint & a, const Footprint & b)
{
  double best = 1e300;
  const int offsets[3] = {-1, 0, 1};
  for (int p : offsets) {
    for (int q : offsets) {
      const double ax = a.center.x + p * a.offset * std::cos(a.heading);
      const double ay = a.center.y + p * a.offset * std::sin(a.heading);
      const double bx = b.center.x + q * b.offset * std::cos(b.heading);
      const double by = b.center.y + q * b.offset * std::sin(b.heading);
      const double d = std::hypot(ax - bx, ay - by);
      if (d < best) {
        best = d;
      }
    }
  }
  return best - (a.radius + b.radius);
}

Footprint random_footprint(std::mt19937_64 & rng)
{
  VehicleGeometry g;
  g.half_width = test::uniform(rng, 0.5, 1.2);
  g.half_length = g.half_width + test::uniform(rng, 0.1, 2.5);
  return geometry::make_footprint(
    test::uniform(rng, -20, 20), test::uniform(rng, -20, 20), test::uniform(rng, -4, 4), g);
}

Footprint moved(const Footprint & f, double angle, double tx, double ty)
{
  Footprint out = f;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  out.center = {c * f.center.x - s * f.center.y + tx, s * f.center.x + c * f.center.y + ty};
  out.heading = f.heading + angle;
  return out;
}

}  // namespace

TEST_SUITE("geometry")
{
  TEST_CASE("footprint circles sit at -D, 0, +D along the heading")
  {
    const auto f = geometry::make_footprint(1.0, 2.0, std::numbers::pi / 2, kGeom);
    CHECK(f.offset == 1.5);
    CHECK(f.radius == 1.0);
    CHECK(f.circle(1).x == doctest::Approx(1.0));
    CHECK(f.circle(1).y == doctest::Approx(3.5));
    CHECK(f.circle(-1).y == doctest::Approx(0.5));
  }

  TEST_CASE("identical footprints give minus twice the half width")
  {
    const auto f = geometry::make_footprint(3, 4, 0.3, kGeom);
    CHECK(geometry::pairwise_distance(f, f) == doctest::Approx(-2.0));
  }

  TEST_CASE("in-line pair 10 m apart")
  {
    const auto a = geometry::make_footprint(0, 0, 0, kGeom);
    const auto b = geometry::make_footprint(10, 0, 0, kGeom);
    CHECK(geometry::pairwise_distance(a, b) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(geometry::pairwise_distance(a, b) == brute_force(a, b));
  }

  TEST_CASE("perpendicular pair matches the brute force")
  {
    const auto a = geometry::make_footprint(0, 0, 0, kGeom);
    const auto b = geometry::make_footprint(4, 3, std::numbers::pi / 2, kGeom);
    CHECK(geometry::pairwise_distance(a, b) == brute_force(a, b));
    CHECK(geometry::pairwise_distance(a, b) == doctest::Approx(std::sqrt(8.5) - 2.0).epsilon(1e-12));
  }

  TEST_CASE("vehicles side by side in neighbouring lanes")
  {
    const auto a = geometry::make_footprint(0, 3.5, 0, kGeom);
    const auto b = geometry::make_footprint(0, 0, 0, kGeom);
    CHECK(geometry::pairwise_distance(a, b) == brute_force(a, b));
    CHECK(geometry::pairwise_distance(a, b) == doctest::Approx(1.5));
    CHECK_FALSE(geometry::is_safe(geometry::pairwise_distance(a, b), {2.0}));
  }

  TEST_CASE("1000 random pairs equal the nine-pair brute force exactly")
  {
    std::mt19937_64 rng(21);
    int mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
      const auto a = random_footprint(rng);
      const auto b = random_footprint(rng);
      mismatches += geometry::pairwise_distance(a, b) == brute_force(a, b) ? 0 : 1;
    }
    CHECK(mismatches == 0);
  }

  TEST_CASE("rigid motions leave the distance unchanged")
  {
    std::mt19937_64 rng(22);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const auto a = random_footprint(rng);
      const auto b = random_footprint(rng);
      const double ang = test::uniform(rng, -std::numbers::pi, std::numbers::pi);
      const double tx = test::uniform(rng, -50, 50);
      const double ty = test::uniform(rng, -50, 50);
      const double d0 = geometry::pairwise_distance(a, b);
      const double d1 = geometry::pairwise_distance(moved(a, ang, tx, ty), moved(b, ang, tx, ty));
      worst = std::max(worst, std::abs(d0 - d1));
    }
    CHECK(worst < 1e-9);
  }

  TEST_CASE("symmetric for equal radii")
  {
    std::mt19937_64 rng(23);
    for (int i = 0; i < 200; ++i) {
      const auto a = geometry::make_footprint(
        test::uniform(rng, -9, 9), test::uniform(rng, -9, 9), test::uniform(rng, -3, 3), kGeom);
      const auto b = geometry::make_footprint(
        test::uniform(rng, -9, 9), test::uniform(rng, -9, 9), test::uniform(rng, -3, 3), kGeom);
      CHECK(geometry::pairwise_distance(a, b) == geometry::pairwise_distance(b, a));
    }
  }

  TEST_CASE("separating along the centre line never decreases the distance")
  {
    // Holds once the circle rows no longer interleave (separation >= 2D); closer than that the
    // nearest pair switches between circles and the distance dips every D metres.
    std::mt19937_64 rng(24);
    for (int i = 0; i < 100; ++i) {
      const double h = test::uniform(rng, -3, 3);
      const double lat = test::uniform(rng, -4, 4);
      const auto a = geometry::make_footprint(0, 0, h, kGeom);
      double prev = -1e300;
      for (double s = 2 * 1.5; s < 20.0; s += 0.25) {
        const auto b = geometry::make_footprint(
          s * std::cos(h) - lat * std::sin(h), s * std::sin(h) + lat * std::cos(h), h, kGeom);
        const double d = geometry::pairwise_distance(a, b);
        CHECK(d >= prev - 1e-12);
        prev = d;
      }
    }
  }

  TEST_CASE("is_safe boundary")
  {
    CHECK(geometry::is_safe(2.114, {2.0}));
    CHECK_FALSE(geometry::is_safe(2.0 - 1e-9, {2.0}));
    CHECK(geometry::is_safe(2.0, {2.0}));
    CHECK(geometry::is_safe(0.0, {0.0}));
  }

  TEST_CASE("heading estimates")
  {
    const std::vector<Vec2> line{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
    for (double h : geometry::estimate_headings(line)) {
      CHECK(h == 0.0);
    }
    const std::vector<Vec2> diag{{0, 0}, {1, 1}, {2, 2}};
    for (double h : geometry::estimate_headings(diag)) {
      CHECK(h == doctest::Approx(std::numbers::pi / 4));
    }
    // a parked car keeps the fallback heading
    const std::vector<Vec2> still{{5, 5}, {5, 5}, {5, 5}};
    for (double h : geometry::estimate_headings(still)) {
      CHECK(h == 0.0);
    }
    // a stop in the middle keeps the heading it had
    const std::vector<Vec2> stop{{0, 0}, {0, 1}, {0, 1}, {0, 1}};
    const auto hs = geometry::estimate_headings(stop);
    CHECK(hs[1] == doctest::Approx(std::numbers::pi / 2));
    CHECK(hs[3] == doctest::Approx(std::numbers::pi / 2));
    const std::vector<Vec2> one{{0, 0}};
    CHECK_THROWS_AS(geometry::estimate_headings(one), ContractError);
  }

  TEST_CASE("min clearance over a trajectory")
  {
    std::vector<VehicleState> ego;
    std::vector<Vec2> far;
    std::vector<Vec2> crossing;
    for (int t = 0; t < 8; ++t) {
      ego.push_back({t * 1.0, 0.0, 0.0, 10.0, 0.0});
      far.push_back({t * 1.0 + 150.0, 0.0});
      crossing.push_back({t == 3 ? 3.0 : t * 1.0 + 40.0, 0.0});
    }
    const std::vector<VehicleGeometry> g1{kGeom};
    const auto c_far = geometry::min_clearance(ego, kGeom, {far}, g1);
    CHECK(c_far.distance > 90.0);

    const auto c = geometry::min_clearance(ego, kGeom, {crossing}, g1);
    CHECK(c.distance == doctest::Approx(-2.0));
    CHECK(c.step == 3);
    CHECK(c.vehicle == 0);

    const std::vector<VehicleState> none;
    CHECK_THROWS_AS(geometry::min_clearance(none, kGeom, {far}, g1), ContractError);
  }

  TEST_CASE("min clearance equals the brute force over every step and vehicle")
  {
    std::mt19937_64 rng(25);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<VehicleState> ego;
      std::vector<std::vector<Vec2>> others(3);
      for (int t = 0; t < 12; ++t) {
        ego.push_back({test::uniform(rng, -10, 10), test::uniform(rng, -4, 4),
          test::uniform(rng, -0.3, 0.3), 10, 0});
        for (auto & o : others) {
          o.push_back({test::uniform(rng, -10, 10), test::uniform(rng, -4, 4)});
        }
      }
      const std::vector<VehicleGeometry> gs(3, kGeom);
      const auto c = geometry::min_clearance(ego, kGeom, others, gs);
      double best = 1e300;
      for (std::size_t i = 0; i < others.size(); ++i) {
        const auto h = geometry::estimate_headings(others[i]);
        for (std::size_t t = 0; t < ego.size(); ++t) {
          const auto a = geometry::make_footprint(ego[t].x, ego[t].y, ego[t].psi, kGeom);
          const auto b = geometry::make_footprint(others[i][t].x, others[i][t].y, h[t], kGeom);
          best = std::min(best, brute_force(a, b));
        }
      }
      CHECK(c.distance == best);
    }
  }

  TEST_CASE("short predictions are padded")
  {
    const std::vector<Vec2> track{{0, 0}, {1, 0}};
    const auto held = geometry::pad_track(track, 4, geometry::Padding::hold);
    REQUIRE(held.size() == 4);
    CHECK(held[3].x == 1.0);
    const auto ext = geometry::pad_track(track, 4, geometry::Padding::extrapolate);
    CHECK(ext[3].x == 3.0);
    const std::vector<Vec2> empty;
    CHECK_THROWS_AS(geometry::pad_track(empty, 4, geometry::Padding::hold), ContractError);
  }
}
