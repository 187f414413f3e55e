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

// lcpso: plan single scenarios, run batches and particle sweeps, export plans.
//
// Exit status: 0 on success, 1 when a single plan is infeasible, 2 on configuration errors,
// 3 on any other failure.

#include "lcpso/harness.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace lcpso;

namespace
{

struct Options
{
  std::string config{"nominal"};
  std::optional<std::uint64_t> seed;
  std::optional<int> particles;
  std::optional<std::string> method;
  std::optional<std::string> predictor;
  std::optional<double> budget_ms;
  std::optional<int> trials;
  std::optional<int> jobs;
  std::string out;
  bool trace{false};
};

fs::path config_dir()
{
  if (const char * env = std::getenv("LCPSO_CONFIG_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
#ifdef LCPSO_DEFAULT_CONFIG_DIR
  return LCPSO_DEFAULT_CONFIG_DIR;
#else
  return "configs";
#endif
}

harness::ScenarioConfig load(const Options & o)
{
  auto c = harness::load_config(harness::resolve_config(o.config, config_dir()));
  if (o.seed) {
    c.seed = *o.seed;
    c.master_seed = *o.seed;
  }
  if (o.particles) {
    c.planner.swarm.particles = *o.particles;
  }
  if (o.method) {
    c.method = *o.method;
  }
  if (o.predictor) {
    c.predictor = *o.predictor == "idm" ? harness::PredictorKind::idm_mobil
                                        : harness::PredictorKind::constant_velocity;
  }
  if (o.budget_ms) {
    c.planner.time_budget_ms = *o.budget_ms;
    c.planner.swarm.time_budget_ms = *o.budget_ms;
    c.success_budget_ms = *o.budget_ms;
  }
  if (o.trials) {
    c.trials = *o.trials;
  }
  if (o.jobs) {
    c.jobs = *o.jobs;
  }
  c.validate();
  return c;
}

std::string fmt_num(double v, int digits = 2)
{
  return std::isfinite(v) ? fmt::format("{:.{}f}", v, digits) : std::string("-");
}

void print_report_header()
{
  fmt::print("{:<10} {:>9} {:>7} {:>9} {:>11} {:>10} {:>9} {:>10}\n", "method", "particles",
    "trials", "success%", "clearance", "med.steps", "mean ms", "median ms");
}

void print_report(const harness::ExperimentReport & r)
{
  const auto & s = r.summary;
  fmt::print("{:<10} {:>9} {:>7} {:>9} {:>11} {:>10} {:>9} {:>10}\n", r.method,
    r.method == "pso" ? std::to_string(r.particles) : std::string("-"), s.trials,
    fmt_num(s.success_rate, 1), fmt_num(s.mean_clearance), fmt_num(s.median_steps, 1),
    fmt_num(s.mean_ms), fmt_num(s.median_ms));
  if (s.errors > 0) {
    fmt::print("  {} trial(s) raised errors; first: {}\n", s.errors, [&] {
      for (const auto & t : r.records) {
        if (!t.error.empty()) {
          return t.error;
        }
      }
      return std::string();
    }());
  }
}

int cmd_plan(const Options & o, bool export_all)
{
  const auto c = load(o);
  const auto outcome = harness::run_trial(c, c.method, c.seed);
  const auto & r = outcome.record;
  const auto & res = outcome.result;
  fmt::print("scenario {} seed {} method {} predictor {}\n", c.name, c.seed, c.method,
    harness::predictor_name(c.predictor));
  fmt::print("feasible {}  min clearance {:.3f} m  steps to merge {}  terminal offset {:.3f} m\n",
    r.feasible ? "yes" : "no", r.min_clearance, r.steps_to_merge, res.evaluation.terminal_offset);
  fmt::print("cost {:.3f}  rounds {}  modifications {}  wall {:.2f} ms\n",
    res.evaluation.terms.total, r.rounds, r.modifications, r.wall_ms);
  if (!res.diagnostic.empty()) {
    fmt::print("note: {}\n", res.diagnostic);
  }
  const fs::path dir = o.out.empty() ? fs::path(".") : fs::path(o.out);
  if (export_all) {
    harness::export_run(dir, outcome, c);
    fmt::print("wrote {}\n", dir.string());
  } else {
    if (!o.out.empty()) {
      harness::write_trajectory_csv(dir / "trajectory.csv", res);
      harness::write_result_json(dir / "result.json", outcome);
    }
    if (o.trace) {
      harness::write_trace_jsonl(dir / "trace.jsonl", res.trace);
    }
  }
  return r.feasible ? 0 : 1;
}

int cmd_batch(const Options & o)
{
  const auto c = load(o);
  const auto rep = harness::run_batch(c, c.method, c.trials);
  fmt::print("scenario {} predictor {} master seed {} budget {} ms\n", c.name, rep.predictor,
    c.master_seed, c.success_budget_ms);
  print_report_header();
  print_report(rep);
  if (!o.out.empty()) {
    harness::write_report_json(fs::path(o.out) / "report.json", {rep});
  }
  return 0;
}

int cmd_sweep(const Options & o, std::vector<int> counts, bool with_mc)
{
  const auto c = load(o);
  if (counts.empty()) {
    counts = c.sweep_particles;
  }
  auto reps = harness::particle_sweep(c, counts, c.trials);
  if (with_mc) {
    reps.push_back(harness::run_batch(c, "mc", c.trials));
  }
  fmt::print("scenario {} predictor {} master seed {} budget {} ms\n", c.name,
    harness::predictor_name(c.predictor), c.master_seed, c.success_budget_ms);
  print_report_header();
  for (const auto & r : reps) {
    print_report(r);
  }
  if (!o.out.empty()) {
    harness::write_report_json(fs::path(o.out) / "report.json", reps);
  }
  return 0;
}

void add_common(CLI::App * app, Options & o)
{
  app->add_option("--config,-c", o.config, "scenario file, or a name looked up in LCPSO_CONFIG_DIR")
    ->capture_default_str();
  app->add_option("--seed", o.seed, "scenario seed (plan) or master seed (batch, sweep)");
  app->add_option("--particles,-p", o.particles, "swarm size")->check(CLI::PositiveNumber);
  app->add_option("--method,-m", o.method, "planner")->check(CLI::IsMember({"pso", "mc"}));
  app->add_option("--predictor", o.predictor, "traffic prediction model")
    ->check(CLI::IsMember({"idm", "constant_velocity"}));
  app->add_option("--budget-ms", o.budget_ms, "planning time budget")->check(CLI::PositiveNumber);
  app->add_option("--out,-o", o.out, "output directory");
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Lane-change trajectory planning with particle swarm optimization"};
  app.require_subcommand(1);
  Options o;
  std::vector<int> counts;
  bool with_mc = false;

  auto * plan = app.add_subcommand("plan", "plan one scenario instance");
  add_common(plan, o);
  plan->add_flag("--trace", o.trace, "write the per-iteration swarm trace (trace.jsonl)");

  auto * exp = app.add_subcommand("export", "plan one instance and write every artifact");
  add_common(exp, o);

  auto * batch = app.add_subcommand("batch", "run independent trials and aggregate");
  add_common(batch, o);
  batch->add_option("--trials,-n", o.trials, "number of trials")->check(CLI::PositiveNumber);
  batch->add_option("--jobs,-j", o.jobs, "parallel trials")->check(CLI::PositiveNumber);

  auto * sweep = app.add_subcommand("sweep", "success rate against swarm size");
  add_common(sweep, o);
  sweep->add_option("--trials,-n", o.trials, "trials per swarm size")->check(CLI::PositiveNumber);
  sweep->add_option("--jobs,-j", o.jobs, "parallel trials")->check(CLI::PositiveNumber);
  sweep->add_option("--counts", counts, "swarm sizes (default from the config)")->delimiter(',');
  sweep->add_flag("--with-mc", with_mc, "append a batch of the Monte Carlo baseline");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plan->parsed()) {
      return cmd_plan(o, false);
    }
    if (exp->parsed()) {
      return cmd_plan(o, true);
    }
    if (batch->parsed()) {
      return cmd_batch(o);
    }
    return cmd_sweep(o, counts, with_mc);
  } catch (const harness::ConfigError & e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const harness::SpawnError & e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
