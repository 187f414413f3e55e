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

// Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.
// Usage: lcpso_acceptance [config_dir]

#include "lcpso/geometry.hpp"
#include "lcpso/harness.hpp"
#include "lcpso/kinematics.hpp"
#include "lcpso/planner.hpp"
#include "lcpso/pso.hpp"
#include "lcpso/smoothing.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

using namespace lcpso;

namespace
{

int failures = 0;

void report(bool ok, const std::string & name, const std::string & detail)
{
  fmt::print("{} {}: {}\n", ok ? "PASS" : "FAIL", name, detail);
  std::fflush(stdout);
  failures += ok ? 0 : 1;
}

double uniform(std::mt19937_64 & rng, double lo, double hi)
{
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double median(std::vector<double> v)
{
  if (v.empty()) {
    return std::nan("");
  }
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// independent re-statements of the model equations
VehicleState bicycle(const VehicleState & s, double delta, double a, double lf, double lr, double dt)
{
  const double beta = std::atan(lr / (lf + lr) * std::tan(delta));
  VehicleState n;
  n.x = s.x + dt * s.v * std::cos(s.psi + beta);
  n.y = s.y + dt * s.v * std::sin(s.psi + beta);
  n.psi = s.psi + dt * s.v / lr * std::sin(beta);
  n.v = std::max(0.0, s.v + dt * a);
  n.beta = beta;
  return n;
}

double nine_pairs(const geometry::Footprint & a, const geometry::Footprint & b)
{
  double best = std::numeric_limits<double>::infinity();
  for (int p = -1; p <= 1; ++p) {
    for (int q = -1; q <= 1; ++q) {
      const double dx = (a.center.x + p * a.offset * std::cos(a.heading)) -
                        (b.center.x + q * b.offset * std::cos(b.heading));
      const double dy = (a.center.y + p * a.offset * std::sin(a.heading)) -
                        (b.center.y + q * b.offset * std::sin(b.heading));
      best = std::min(best, std::hypot(dx, dy));
    }
  }
  return best - (a.radius + b.radius);
}

pso::SwarmContext swarm_context(const harness::Scenario & s, const harness::ScenarioConfig & c,
  const prediction::Predictor & predictor)
{
  const auto & req = s.request;
  pso::SwarmContext ctx;
  ctx.initial = req.ego;
  ctx.ego_geometry = req.ego_geometry;
  ctx.other_geometries = req.other_geometries;
  ctx.predictor = &predictor;
  ctx.observations = &req.observations;
  ctx.safety = c.planner.safety;
  ctx.weights = c.planner.weights;
  ctx.heading_cost = c.planner.heading_cost;
  ctx.padding = c.planner.padding;
  ctx.bounds = c.planner.bounds;
  ctx.alignment_tolerance = c.planner.alignment_tolerance;
  return ctx;
}

harness::ScenarioConfig with_particles(harness::ScenarioConfig c, int n)
{
  c.planner.swarm.particles = n;
  return c;
}

}  // namespace

int main(int argc, char ** argv)
{
  const std::filesystem::path dir = argc > 1 ? argv[1] : LCPSO_TEST_CONFIG_DIR;
  const auto nominal = harness::load_config(dir / "nominal.toml");
  const auto wall = harness::load_config(dir / "wall.toml");
  const int trials = nominal.trials;
  const double eps = nominal.planner.safety.epsilon;
  fmt::print("nominal: {} trials, master seed {}, {} vehicles, epsilon {} m, predictor {}\n", trials,
    nominal.master_seed, nominal.vehicle_count(), eps, harness::predictor_name(nominal.predictor));

  // ---- batches shared by several criteria ----
  const auto t0 = std::chrono::steady_clock::now();
  const auto pso2 = harness::run_batch(with_particles(nominal, 2), "pso", trials);
  const double batch_s = seconds_since(t0);
  const auto pso1 = harness::run_batch(with_particles(nominal, 1), "pso", trials);
  const auto pso3 = harness::run_batch(with_particles(nominal, 3), "pso", trials);
  const auto mc = harness::run_batch(nominal, "mc", trials);

  // 1. safety
  {
    double worst = std::numeric_limits<double>::infinity();
    int feasible = 0;
    int errors = pso2.summary.errors;
    for (const auto & r : pso2.records) {
      if (r.feasible) {
        ++feasible;
        worst = std::min(worst, r.min_clearance);
      }
    }
    const double mean = pso2.summary.mean_clearance;
    const bool ok = feasible > 0 && errors == 0 && worst >= eps && mean >= 2.0 && mean <= 3.0 &&
                    batch_s < 300.0;
    report(ok, "safety",
      fmt::format("{} feasible of {}, min clearance {:.3f} m (>= {}), mean {:.3f} m (in [2, 3]), "
                  "batch {:.2f} s (< 300)",
        feasible, trials, worst, eps, mean, batch_s));
  }

  // 2. success ordering
  {
    const double s1 = pso1.summary.success_rate;
    const double s2 = pso2.summary.success_rate;
    const double s3 = pso3.summary.success_rate;
    const bool ok = s2 > s1 && s3 >= s2 - 10.0 && s2 >= 70.0 && s3 >= 70.0;
    report(ok, "success-ordering",
      fmt::format("success 1/2/3 particles = {:.0f}/{:.0f}/{:.0f} % (need 2 > 1, 3 >= 2 - 10, 2 and 3 >= 70)",
        s1, s2, s3));
  }

  // 3. steps to merge
  {
    const double p = pso2.summary.median_steps;
    const double m = mc.summary.median_steps;
    report(p <= m && p <= 25.0, "steps-to-merge",
      fmt::format("median steps PSO(2) {} vs MC {} (need PSO <= MC and PSO <= 25)", p, m));
  }

  // 4. timing
  {
    std::vector<double> ms;
    for (const auto & r : pso2.records) {
      ms.push_back(r.wall_ms);
    }
    const double med = median(ms);
    report(med < 200.0, "timing",
      fmt::format("median single plan {:.2f} ms over {} seeds (< 200), max {:.2f} ms", med, ms.size(),
        *std::max_element(ms.begin(), ms.end())));
  }

  // 5. convergence: every logged swarm run
  {
    int runs = 0;
    int bad = 0;
    for (const auto & cfg : {with_particles(nominal, 1), with_particles(nominal, 2), with_particles(nominal, 3)}) {
      for (int i = 0; i < trials; ++i) {
        const auto out = harness::run_trial(cfg, "pso", harness::trial_seed(cfg.master_seed, i), i);
        const auto & trace = out.result.trace;
        for (std::size_t k = 0; k < trace.size(); ++k) {
          if (trace[k].iteration == 0) {
            ++runs;
            continue;
          }
          if (trace[k].round == trace[k - 1].round && trace[k].global_best > trace[k - 1].global_best) {
            ++bad;
          }
        }
      }
    }
    report(bad == 0 && runs > 0, "pso-convergence",
      fmt::format("{} swarm runs logged, {} increases of the global best", runs, bad));
  }

  // 6. kinematics oracle
  {
    std::mt19937_64 rng(20240601);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      VehicleGeometry g;
      g.lf = uniform(rng, 0.8, 2.0);
      g.lr = uniform(rng, 0.8, 2.0);
      g.half_length = std::max(g.lf, g.lr) + 0.5;
      VehicleState s;
      s.x = uniform(rng, -100.0, 100.0);
      s.y = uniform(rng, -10.0, 10.0);
      s.psi = uniform(rng, -std::numbers::pi, std::numbers::pi);
      s.v = uniform(rng, 0.0, 30.0);
      const double delta = uniform(rng, -0.5, 0.5);
      const double a = uniform(rng, -3.0, 3.0);
      const double dt = uniform(rng, 0.01, 0.2);
      const auto got = kinematics::step(s, {delta, a}, g, dt);
      const auto want = bicycle(s, delta, a, g.lf, g.lr, dt);
      for (auto [u, w] : {std::pair{got.x, want.x}, {got.y, want.y}, {got.psi, want.psi},
             {got.v, want.v}, {got.beta, want.beta}}) {
        worst = std::max(worst, std::abs(u - w) / std::max(1.0, std::abs(w)));
      }
    }
    report(worst <= 1e-12, "kinematics-oracle",
      fmt::format("1000 random steps, worst relative error {:.3g} (<= 1e-12)", worst));
  }

  // 7. distance metric oracle
  {
    std::mt19937_64 rng(777);
    int mismatches = 0;
    double worst_motion = 0.0;
    for (int i = 0; i < 1000; ++i) {
      VehicleGeometry ga;
      VehicleGeometry gb;
      ga.half_width = uniform(rng, 0.6, 1.2);
      ga.half_length = ga.half_width + uniform(rng, 0.5, 2.5);
      gb.half_width = uniform(rng, 0.6, 1.2);
      gb.half_length = gb.half_width + uniform(rng, 0.5, 2.5);
      const double ax = uniform(rng, -20, 20), ay = uniform(rng, -20, 20), ah = uniform(rng, -3.2, 3.2);
      const double bx = uniform(rng, -20, 20), by = uniform(rng, -20, 20), bh = uniform(rng, -3.2, 3.2);
      const auto a = geometry::make_footprint(ax, ay, ah, ga);
      const auto b = geometry::make_footprint(bx, by, bh, gb);
      const double d = geometry::pairwise_distance(a, b);
      mismatches += d == nine_pairs(a, b) ? 0 : 1;
      // rotate both about the origin and translate
      const double th = uniform(rng, -3.2, 3.2), tx = uniform(rng, -50, 50), ty = uniform(rng, -50, 50);
      const auto move = [&](double x, double y, double h, const VehicleGeometry & g) {
        return geometry::make_footprint(std::cos(th) * x - std::sin(th) * y + tx,
          std::sin(th) * x + std::cos(th) * y + ty, h + th, g);
      };
      const double moved = geometry::pairwise_distance(move(ax, ay, ah, ga), move(bx, by, bh, gb));
      worst_motion = std::max(worst_motion, std::abs(moved - d));
    }
    report(mismatches == 0 && worst_motion <= 1e-9, "distance-oracle",
      fmt::format("1000 random pairs, {} mismatches against the 9-pair brute force, rigid motion "
                  "drift {:.3g} (<= 1e-9)",
        mismatches, worst_motion));
  }

  // 8. smoothing
  {
    std::mt19937_64 rng(99);
    double worst_end = 0.0;
    double worst_slope = 0.0;
    for (int t = 0; t < 200; ++t) {
      std::vector<Vec2> a(t % 4 == 0 ? 3 : 4);
      double x = uniform(rng, -50, 50);
      for (auto & p : a) {
        p = {x, uniform(rng, -4, 4)};
        x += uniform(rng, 0.5, 15);
      }
      const auto fit = smoothing::fit_cubic(a);
      worst_end = std::max({worst_end, std::abs(fit.curve.raw_value(a.front().x) - a.front().y),
        std::abs(fit.curve.raw_value(a.back().x) - a.back().y)});
      worst_slope = std::max(worst_slope, std::abs(fit.curve.raw_slope(a.back().x)));
    }
    const auto predictor = harness::make_predictor(nominal);
    // select_waypoints is defined on feasible trajectories; infeasible outputs are counted apart
    int corpus = 0;
    int rougher = 0;
    int outside = 0;
    int outside_rougher = 0;
    for (int i = 0; i < 200; ++i) {
      const auto seed = harness::trial_seed(nominal.master_seed, i);
      const auto s = harness::build_scenario(nominal, seed);
      const auto ref = planner::initial_plan(s.request, nominal.planner);
      auto swarm = nominal.planner.swarm;
      swarm.seed = seed;
      const auto out = pso::run(ref, swarm_context(s, nominal, *predictor), swarm);
      const auto pts = out.trajectory.positions();
      const auto anchors = smoothing::select_waypoints(pts);
      if (!anchors) {
        continue;
      }
      const auto fit = smoothing::fit_cubic(*anchors);
      const auto regen = smoothing::regenerate_reference(
        fit.curve, out.trajectory, s.request.horizon, s.request.dt, s.request.ego_geometry, ref);
      std::vector<double> raw;
      std::vector<double> smooth{s.request.ego.y};
      for (const auto & p : pts) {
        raw.push_back(p.y);
      }
      for (const auto & w : regen.waypoints) {
        smooth.push_back(w.y);
      }
      const bool worse =
        smoothing::max_second_difference(smooth) > smoothing::max_second_difference(raw);
      if (!out.feasible) {
        ++outside;
        outside_rougher += worse ? 1 : 0;
        continue;
      }
      ++corpus;
      rougher += worse ? 1 : 0;
    }
    const bool ok = worst_end < 1e-9 && worst_slope < 1e-9 && rougher == 0 && corpus > 0;
    report(ok, "smoothing",
      fmt::format("200 anchor sets: endpoint error {:.3g}, terminal slope {:.3g} (< 1e-9); "
                  "{} of {} feasible swarm outputs roughened ({} of {} infeasible ones, not gated)",
        worst_end, worst_slope, rougher, corpus, outside_rougher, outside));
  }

  // 9. no traffic
  {
    constexpr double kThreshold = 1.0;  // sum of squared deviations [m^2] over the horizon
    auto empty = with_particles(nominal, 2);
    empty.traffic.clear();
    double worst = 0.0;
    int infeasible = 0;
    for (int i = 0; i < trials; ++i) {
      const auto out = harness::run_trial(empty, "pso", harness::trial_seed(empty.master_seed, i), i);
      worst = std::max(worst, out.result.evaluation.terms.f_ref);
      infeasible += out.result.feasible ? 0 : 1;
    }
    report(worst < kThreshold && infeasible == 0, "no-traffic",
      fmt::format("{} runs without traffic, worst f_ref {:.4f} (< {}), {} infeasible", trials, worst,
        kThreshold, infeasible));
  }

  // 10. Monte Carlo baseline contract
  {
    int over = 0;
    int unsafe = 0;
    int leaked = 0;
    double widest = 0.0;
    const auto check = [&](const harness::ScenarioConfig & cfg, int n) {
      for (int i = 0; i < n; ++i) {
        const auto out = harness::run_trial(cfg, "mc", harness::trial_seed(cfg.master_seed, i), i);
        const auto & r = out.result;
        over += r.modifications > cfg.planner.mc_max_modifications ? 1 : 0;
        widest = std::max(widest, std::abs(r.target_shift));
        if (!r.feasible) {
          leaked += r.trajectory.empty() ? 0 : 1;
          continue;
        }
        const std::span<const VehicleState> st(r.trajectory.states);
        const double c = geometry::min_clearance(st.subspan(1), out.scenario.request.ego_geometry,
          r.predictions.tracks, out.scenario.request.other_geometries, cfg.planner.padding).distance;
        unsafe += c < cfg.planner.safety.epsilon ? 1 : 0;
      }
    };
    check(nominal, trials);
    check(wall, wall.trials);
    const bool ok = over == 0 && unsafe == 0 && leaked == 0 && widest <= nominal.planner.mc_margin &&
                    nominal.planner.mc_max_modifications == 12 && nominal.planner.mc_margin == 15.0;
    report(ok, "mc-contract",
      fmt::format("{} nominal + {} wall trials: {} over 12 modifications, widest shift {:.2f} m "
                  "(<= 15), {} unsafe trajectories emitted, {} failures carrying a trajectory",
        trials, wall.trials, over, widest, unsafe, leaked));
  }

  fmt::print("{} of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
