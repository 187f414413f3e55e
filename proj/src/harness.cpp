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

#include "lcpso/harness.hpp"

#include "lcpso/geometry.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <toml.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace lcpso::harness
{

namespace
{

[[noreturn]] void fail(const std::string & source, const toml::node * node, const std::string & msg)
{
  if (node != nullptr && node->source().begin.line > 0) {
    throw ConfigError(fmt::format("{}:{}: {}", source, node->source().begin.line, msg));
  }
  throw ConfigError(fmt::format("{}: {}", source, msg));
}

// A TOML table plus the keys read from it, so leftovers can be reported as typos.
class Section
{
public:
  Section(const toml::table * table, std::string name, std::string source)
  : table_(table), name_(std::move(name)), source_(std::move(source))
  {
  }

  const toml::node * node(const std::string & key)
  {
    used_.insert(key);
    return table_ == nullptr ? nullptr : table_->get(key);
  }

  void number(const std::string & key, double & out, const std::function<bool(double)> & ok = {},
    const char * requirement = "")
  {
    const auto * n = node(key);
    if (n == nullptr) {
      return;
    }
    if (!n->is_number()) {
      fail(source_, n, fmt::format("[{}] {} must be a number", name_, key));
    }
    const double v = n->value<double>().value();
    if (!std::isfinite(v) || (ok && !ok(v))) {
      fail(source_, n, fmt::format("[{}] {} {}", name_, key, *requirement ? requirement : "is out of range"));
    }
    out = v;
  }

  void integer(const std::string & key, int & out, int min_value,
    int max_value = std::numeric_limits<int>::max())
  {
    const auto * n = node(key);
    if (n == nullptr) {
      return;
    }
    if (!n->is_integer()) {
      fail(source_, n, fmt::format("[{}] {} must be an integer", name_, key));
    }
    const auto v = n->value<std::int64_t>().value();
    if (v < min_value || v > max_value) {
      fail(source_, n, max_value == std::numeric_limits<int>::max()
                         ? fmt::format("[{}] {} must be >= {}", name_, key, min_value)
                         : fmt::format("[{}] {} must be in [{}, {}]", name_, key, min_value, max_value));
    }
    out = static_cast<int>(v);
  }

  void seed(const std::string & key, std::uint64_t & out)
  {
    const auto * n = node(key);
    if (n == nullptr) {
      return;
    }
    if (!n->is_integer() || n->value<std::int64_t>().value() < 0) {
      fail(source_, n, fmt::format("[{}] {} must be a non-negative integer", name_, key));
    }
    out = static_cast<std::uint64_t>(n->value<std::int64_t>().value());
  }

  void boolean(const std::string & key, bool & out)
  {
    const auto * n = node(key);
    if (n == nullptr) {
      return;
    }
    if (!n->is_boolean()) {
      fail(source_, n, fmt::format("[{}] {} must be true or false", name_, key));
    }
    out = n->value<bool>().value();
  }

  // Returns the chosen option's index in `choices`, or nullopt when the key is absent.
  std::optional<std::size_t> choice(const std::string & key, const std::vector<std::string> & choices)
  {
    const auto * n = node(key);
    if (n == nullptr) {
      return std::nullopt;
    }
    const auto s = n->value<std::string>();
    if (s) {
      const auto it = std::find(choices.begin(), choices.end(), *s);
      if (it != choices.end()) {
        return static_cast<std::size_t>(it - choices.begin());
      }
    }
    std::string list;
    for (const auto & c : choices) {
      list += (list.empty() ? "\"" : ", \"") + c + "\"";
    }
    fail(source_, n, fmt::format("[{}] {} must be one of {}", name_, key, list));
  }

  // A number (fixed value) or a two-element [min, max] array.
  void range(const std::string & key, double & lo, double & hi)
  {
    const auto * n = node(key);
    if (n == nullptr) {
      return;
    }
    if (n->is_number()) {
      lo = hi = n->value<double>().value();
      return;
    }
    const auto * arr = n->as_array();
    if (arr == nullptr || arr->size() != 2 || !(*arr)[0].is_number() || !(*arr)[1].is_number()) {
      fail(source_, n, fmt::format("[{}] {} must be a number or a [min, max] pair", name_, key));
    }
    lo = (*arr)[0].value<double>().value();
    hi = (*arr)[1].value<double>().value();
    if (!(lo <= hi)) {
      fail(source_, n, fmt::format("[{}] {} range is empty ({} > {})", name_, key, lo, hi));
    }
  }

  void int_list(const std::string & key, std::vector<int> & out, int min_value)
  {
    const auto * n = node(key);
    if (n == nullptr) {
      return;
    }
    const auto * arr = n->as_array();
    if (arr == nullptr || arr->empty()) {
      fail(source_, n, fmt::format("[{}] {} must be a non-empty array of integers", name_, key));
    }
    std::vector<int> v;
    for (const auto & e : *arr) {
      if (!e.is_integer() || e.value<std::int64_t>().value() < min_value) {
        fail(source_, n, fmt::format("[{}] {} entries must be integers >= {}", name_, key, min_value));
      }
      v.push_back(static_cast<int>(e.value<std::int64_t>().value()));
    }
    out = std::move(v);
  }

  Section sub(const std::string & key)
  {
    const auto * n = node(key);
    if (n != nullptr && !n->is_table()) {
      fail(source_, n, fmt::format("[{}] {} must be a table", name_, key));
    }
    return Section(n == nullptr ? nullptr : n->as_table(), name_.empty() ? key : name_ + "." + key, source_);
  }

  void finish() const
  {
    if (table_ == nullptr) {
      return;
    }
    for (const auto & [k, v] : *table_) {
      if (used_.count(std::string(k.str())) == 0) {
        fail(source_, &v, fmt::format("unknown key '{}' in [{}]", k.str(), name_));
      }
    }
  }

  const toml::table * table() const { return table_; }
  const std::string & name() const { return name_; }

private:
  const toml::table * table_;
  std::string name_;
  std::string source_;
  std::set<std::string> used_;
};

const auto positive = [](double v) { return v > 0.0; };
const auto non_negative = [](double v) { return v >= 0.0; };

void read_vehicle_spawn(Section & s, VehicleSpawn & spawn, int lane_count)
{
  s.integer("lane", spawn.lane, 0, lane_count - 1);
  s.range("x", spawn.x_min, spawn.x_max);
  s.range("speed", spawn.speed_min, spawn.speed_max);
}

std::uint64_t splitmix64(std::uint64_t & state)
{
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31U);
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t stream)
{
  std::uint64_t s = seed ^ (stream * 0xD1B54A32D192ED03ULL);
  return splitmix64(s);
}

double median(std::vector<double> v)
{
  if (v.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string num(double v)
{
  return std::isfinite(v) ? fmt::format("{}", v) : std::string(std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf"));
}

std::ofstream open_out(const std::filesystem::path & path)
{
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  return out;
}

nlohmann::json terms_json(const cost::CostBreakdown & b)
{
  return {{"f_ref", b.f_ref}, {"f_head", b.f_head}, {"f_col", b.f_col}, {"f_a", b.f_a},
    {"f_j", b.f_j}, {"f_s", b.f_s}, {"f_la", b.f_la}, {"total", b.total}};
}

nlohmann::json aggregates_json(const Aggregates & a)
{
  return {{"trials", a.trials}, {"feasible", a.feasible}, {"successes", a.successes},
    {"errors", a.errors}, {"success_rate", a.success_rate}, {"mean_clearance", a.mean_clearance},
    {"median_steps", a.median_steps}, {"mean_ms", a.mean_ms}, {"median_ms", a.median_ms}};
}

nlohmann::json record_json(const TrialRecord & r)
{
  nlohmann::json j = {{"index", r.index}, {"seed", r.seed}, {"method", r.method},
    {"particles", r.particles}, {"feasible", r.feasible}, {"success", r.success},
    {"min_clearance", r.min_clearance}, {"steps_to_merge", r.steps_to_merge},
    {"wall_ms", r.wall_ms}, {"rounds", r.rounds}, {"modifications", r.modifications}};
  if (!r.error.empty()) {
    j["error"] = r.error;
  }
  return j;
}

}  // namespace

// ---- configuration -----------------------------------------------------------------------

void ScenarioConfig::validate() const
{
  const auto err = [&](const std::string & msg) { throw ConfigError(source + ": " + msg); };
  if (horizon < 2) {
    err("horizon must be >= 2");
  }
  if (observation_steps < 2) {
    err("observation_steps must be >= 2");
  }
  if (prediction_steps < 1) {
    err("prediction_steps must be >= 1");
  }
  if (ego_lane < 0 || ego_lane >= lanes.lane_count) {
    err(fmt::format("ego lane {} is not on a {}-lane road", ego_lane, lanes.lane_count));
  }
  if (target_lane < 0 || target_lane >= lanes.lane_count) {
    err(fmt::format("target lane {} is not on a {}-lane road", target_lane, lanes.lane_count));
  }
  if (vehicle.half_width * 2.0 > lanes.lane_width) {
    err("vehicle is wider than a lane");
  }
  for (std::size_t i = 0; i < traffic.size(); ++i) {
    const auto & t = traffic[i];
    if (t.lane < 0 || t.lane >= lanes.lane_count) {
      err(fmt::format("traffic vehicle {} lane {} is not on the road", i, t.lane));
    }
    if (!(t.x_min <= t.x_max) || !(t.speed_min <= t.speed_max) || t.speed_min < 0.0) {
      err(fmt::format("traffic vehicle {} has an empty or negative spawn range", i));
    }
  }
  if (method != "pso" && method != "mc") {
    err("method must be \"pso\" or \"mc\"");
  }
  try {
    planner.swarm.validate();
    planner.weights.validate();
  } catch (const ContractError & e) {
    err(e.what());
  }
  if (planner.mc_max_modifications < 0 || !(planner.mc_margin >= 0.0)) {
    err("mc settings must be non-negative");
  }
}

ScenarioConfig parse_config(std::string_view text, const std::string & source)
{
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error & e) {
    throw ConfigError(fmt::format(
      "{}:{}:{}: {}", source, e.source().begin.line, e.source().begin.column, e.description()));
  }

  ScenarioConfig c;
  c.source = source;
  Section top(&root, "", source);

  {
    auto s = top.sub("scenario");
    if (const auto * n = s.node("name"); n != nullptr) {
      if (!n->is_string()) {
        fail(source, n, "[scenario] name must be a string");
      }
      c.name = n->value<std::string>().value();
    }
    s.seed("seed", c.seed);
    s.number("dt", c.dt, positive, "must be > 0");
    s.integer("horizon", c.horizon, 2);
    s.integer("observation_steps", c.observation_steps, 2);
    s.integer("prediction_steps", c.prediction_steps, 1);
    s.number("safety_buffer", c.planner.safety.epsilon, non_negative, "must be >= 0");
    s.finish();
  }
  {
    auto s = top.sub("road");
    s.number("lane_width", c.lanes.lane_width, positive, "must be > 0");
    s.integer("lane_count", c.lanes.lane_count, 1);
    s.finish();
  }
  {
    auto s = top.sub("vehicle");
    double length = 2.0 * c.vehicle.half_length;
    double width = 2.0 * c.vehicle.half_width;
    s.number("length", length, positive, "must be > 0");
    s.number("width", width, positive, "must be > 0");
    s.number("lf", c.vehicle.lf, positive, "must be > 0");
    s.number("lr", c.vehicle.lr, positive, "must be > 0");
    if (width > length) {
      fail(source, s.node("width"), "[vehicle] width must not exceed length");
    }
    c.vehicle.half_length = 0.5 * length;
    c.vehicle.half_width = 0.5 * width;
    s.finish();
  }
  {
    auto s = top.sub("ego");
    s.number("x", c.ego_x);
    s.integer("lane", c.ego_lane, 0, c.lanes.lane_count - 1);
    s.number("speed", c.ego_speed, non_negative, "must be >= 0");
    s.integer("target_lane", c.target_lane, 0, c.lanes.lane_count - 1);
    s.number("target_distance", c.target_distance, positive, "must be > 0");
    s.finish();
  }
  {
    auto s = top.sub("traffic");
    s.integer("max_attempts", c.max_spawn_attempts, 1);
    // `count` vehicles sharing one spawn band, then any explicitly listed vehicles.
    int count = 0;
    s.integer("count", count, 0);
    if (count > 0) {
      VehicleSpawn band;
      read_vehicle_spawn(s, band, c.lanes.lane_count);
      c.traffic.assign(static_cast<std::size_t>(count), band);
    } else if (s.table() != nullptr &&
               (s.table()->contains("x") || s.table()->contains("lane") || s.table()->contains("speed"))) {
      fail(source, s.table()->get("x") ? s.table()->get("x") : s.table(),
        "[traffic] spawn band given without count");
    }
    if (const auto * n = s.node("vehicle"); n != nullptr) {
      const auto * arr = n->as_array();
      if (arr == nullptr || !arr->is_array_of_tables()) {
        fail(source, n, "[traffic] vehicle must be an array of tables ([[traffic.vehicle]])");
      }
      for (const auto & e : *arr) {
        Section v(e.as_table(), "traffic.vehicle", source);
        VehicleSpawn spawn;
        read_vehicle_spawn(v, spawn, c.lanes.lane_count);
        v.finish();
        c.traffic.push_back(spawn);
      }
    }
    s.finish();
  }
  {
    auto s = top.sub("prediction");
    if (const auto k = s.choice("model", {"idm", "constant_velocity"})) {
      c.predictor = *k == 0 ? PredictorKind::idm_mobil : PredictorKind::constant_velocity;
    }
    auto idm = s.sub("idm");
    idm.number("desired_speed", c.idm.desired_speed, positive, "must be > 0");
    idm.number("time_headway", c.idm.time_headway, non_negative, "must be >= 0");
    idm.number("min_gap", c.idm.min_gap, non_negative, "must be >= 0");
    idm.number("max_accel", c.idm.max_accel, positive, "must be > 0");
    idm.number("comfortable_decel", c.idm.comfortable_decel, positive, "must be > 0");
    idm.number("exponent", c.idm.exponent, positive, "must be > 0");
    idm.finish();
    auto mobil = s.sub("mobil");
    mobil.boolean("enabled", c.mobil.enabled);
    mobil.number("politeness", c.mobil.politeness, non_negative, "must be >= 0");
    mobil.number("threshold", c.mobil.threshold);
    mobil.number("safe_decel", c.mobil.safe_decel, positive, "must be > 0");
    mobil.number("lane_change_duration", c.mobil.lane_change_duration, positive, "must be > 0");
    mobil.finish();
    s.finish();
  }
  auto & p = c.planner;
  bool swarm_budget_set = false;
  {
    auto s = top.sub("pso");
    s.integer("particles", p.swarm.particles, 1);
    s.integer("iterations", p.swarm.iterations, 1);
    s.number("inertia_start", p.swarm.inertia_start, positive, "must be > 0");
    s.number("inertia_end", p.swarm.inertia_end, positive, "must be > 0");
    s.number("c1", p.swarm.c1, positive, "must be > 0");
    s.number("c2", p.swarm.c2, positive, "must be > 0");
    s.number("init_position_range", p.swarm.init_position_range, non_negative, "must be >= 0");
    s.number("init_velocity_range", p.swarm.init_velocity_range, non_negative, "must be >= 0");
    s.number("collision_boost", p.swarm.collision_boost, [](double v) { return v >= 1.0; },
      "must be >= 1");
    s.number("velocity_limit", p.swarm.velocity_limit, non_negative, "must be >= 0");
    s.boolean("random_per_dimension", p.swarm.random_per_dimension);
    s.integer("predict_every", p.swarm.predict_every, 0);
    s.boolean("reference_global_best", p.swarm.reference_global_best);
    swarm_budget_set = s.table() != nullptr && s.table()->contains("time_budget_ms");
    s.number("time_budget_ms", p.swarm.time_budget_ms, positive, "must be > 0");
    if (p.swarm.inertia_end > p.swarm.inertia_start) {
      fail(source, s.node("inertia_end"), "[pso] inertia_end must not exceed inertia_start");
    }
    s.finish();
  }
  {
    auto s = top.sub("cost");
    auto & w = p.weights;
    for (auto [key, ref] : {std::pair<const char *, double *>{"w_ref", &w.w_ref}, {"w_head", &w.w_head},
           {"w_col", &w.w_col}, {"w_a", &w.w_a}, {"w_j", &w.w_j}, {"w_s", &w.w_s}, {"w_la", &w.w_la},
           {"collision_penalty", &w.collision_penalty},
           {"lane_violation_penalty", &w.lane_violation_penalty}}) {
      s.number(key, *ref, non_negative, "must be >= 0");
    }
    if (const auto k = s.choice("heading", {"squared", "signed_sum"})) {
      p.heading_cost = *k == 0 ? cost::HeadingCost::squared : cost::HeadingCost::signed_sum;
    }
    s.finish();
  }
  {
    auto s = top.sub("planner");
    s.integer("max_rounds", p.max_rounds, 1);
    s.number("time_budget_ms", p.time_budget_ms, positive, "must be > 0");
    s.number("convergence_tolerance", p.convergence_tolerance, non_negative, "must be >= 0");
    s.number("alignment_tolerance", p.alignment_tolerance, positive, "must be > 0");
    if (const auto k = s.choice("padding", {"extrapolate", "hold"})) {
      p.padding = *k == 0 ? geometry::Padding::extrapolate : geometry::Padding::hold;
    }
    s.boolean("score_refit", p.score_refit);
    s.number("max_steer", p.bounds.max_steer, positive, "must be > 0");
    s.number("max_accel", p.bounds.max_accel, positive, "must be > 0");
    s.finish();
  }
  if (!swarm_budget_set) {
    p.swarm.time_budget_ms = p.time_budget_ms;
  }
  {
    auto s = top.sub("mc");
    s.integer("max_modifications", p.mc_max_modifications, 0);
    s.number("margin", p.mc_margin, non_negative, "must be >= 0");
    s.finish();
  }
  {
    auto s = top.sub("experiment");
    if (const auto k = s.choice("method", {"pso", "mc"})) {
      c.method = *k == 0 ? "pso" : "mc";
    }
    s.integer("trials", c.trials, 1);
    s.seed("master_seed", c.master_seed);
    s.number("success_budget_ms", c.success_budget_ms, positive, "must be > 0");
    s.integer("jobs", c.jobs, 1);
    s.int_list("sweep_particles", c.sweep_particles, 1);
    s.finish();
  }
  top.finish();

  c.validate();
  return c;
}

ScenarioConfig load_config(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError(path.string() + ": cannot open file");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

std::filesystem::path resolve_config(
  const std::string & name_or_path, const std::filesystem::path & config_dir)
{
  namespace fs = std::filesystem;
  if (fs::is_regular_file(name_or_path)) {
    return name_or_path;
  }
  for (const auto & candidate : {config_dir / name_or_path, config_dir / (name_or_path + ".toml")}) {
    if (!config_dir.empty() && fs::is_regular_file(candidate)) {
      return candidate;
    }
  }
  throw ConfigError(fmt::format(
    "{}: no such file (also looked in '{}')", name_or_path, config_dir.string()));
}

// ---- scenarios ---------------------------------------------------------------------------

Scenario build_scenario(const ScenarioConfig & config, std::uint64_t seed)
{
  config.validate();
  Scenario sc;
  sc.seed = seed;
  auto & req = sc.request;
  req.ego = VehicleState{config.ego_x, config.lanes.center(config.ego_lane), 0.0, config.ego_speed, 0.0};
  req.target_x = config.ego_x + config.target_distance;
  req.target_y = config.lanes.center(config.target_lane);
  req.target_heading = 0.0;
  req.lanes = config.lanes;
  req.ego_geometry = config.vehicle;
  req.horizon = static_cast<std::size_t>(config.horizon);
  req.dt = config.dt;

  std::mt19937_64 rng(seed);
  const auto ego_fp = geometry::make_footprint(req.ego.x, req.ego.y, 0.0, config.vehicle);
  const double eps = config.planner.safety.epsilon;
  std::vector<geometry::Footprint> placed;
  bool ok = false;
  for (int attempt = 0; attempt < config.max_spawn_attempts && !ok; ++attempt) {
    sc.others.clear();
    placed.clear();
    ok = true;
    for (const auto & t : config.traffic) {
      const double x = std::uniform_real_distribution<double>(t.x_min, t.x_max)(rng);
      const double v = std::uniform_real_distribution<double>(t.speed_min, t.speed_max)(rng);
      const double y = config.lanes.center(t.lane);
      const auto fp = geometry::make_footprint(x, y, 0.0, config.vehicle);
      if (geometry::pairwise_distance(ego_fp, fp) < eps) {
        ok = false;
      }
      for (const auto & q : placed) {
        if (geometry::pairwise_distance(fp, q) <= 0.0) {
          ok = false;
        }
      }
      placed.push_back(fp);
      sc.others.push_back(VehicleState{x, y, 0.0, v, 0.0});
    }
  }
  if (!ok) {
    throw SpawnError(fmt::format(
      "{}: could not place {} vehicles without overlap within {} attempts; widen the spawn ranges",
      config.source, config.traffic.size(), config.max_spawn_attempts));
  }

  req.observations.dt = config.dt;
  const int n_obs = config.observation_steps;
  for (const auto & s : sc.others) {
    std::vector<Vec2> track;
    track.reserve(static_cast<std::size_t>(n_obs));
    for (int k = 0; k < n_obs; ++k) {
      track.push_back({s.x - s.v * config.dt * (n_obs - 1 - k), s.y});
    }
    req.observations.tracks.push_back(std::move(track));
    req.other_geometries.push_back(config.vehicle);
  }
  return sc;
}

std::unique_ptr<prediction::Predictor> make_predictor(const ScenarioConfig & config)
{
  const auto steps = static_cast<std::size_t>(config.prediction_steps);
  if (config.predictor == PredictorKind::constant_velocity) {
    return std::make_unique<prediction::ConstantVelocityPredictor>(steps);
  }
  prediction::TrafficModel model;
  model.lanes = config.lanes;
  model.idm = config.idm;
  model.mobil = config.mobil;
  model.ego_geometry = config.vehicle;
  model.geometries.assign(config.traffic.size(), config.vehicle);
  return std::make_unique<prediction::IdmMobilPredictor>(steps, std::move(model));
}

std::string predictor_name(PredictorKind kind)
{
  return kind == PredictorKind::idm_mobil ? "idm" : "constant_velocity";
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t index)
{
  return derive(master_seed, static_cast<std::uint64_t>(index) + 1);
}

// ---- experiments -------------------------------------------------------------------------

TrialOutcome run_trial(
  const ScenarioConfig & config, const std::string & method, std::uint64_t seed, std::size_t index)
{
  TrialOutcome out;
  out.record.index = index;
  out.record.seed = seed;
  out.record.method = method;
  out.record.particles = method == "pso" ? config.planner.swarm.particles : 0;

  out.scenario = build_scenario(config, derive(seed, 1));
  const auto predictor = make_predictor(config);
  auto cfg = config.planner;
  cfg.swarm.seed = derive(seed, 2);
  if (method == "pso") {
    out.result = planner::plan(out.scenario.request, *predictor, cfg);
  } else if (method == "mc") {
    out.result = planner::mc_modify_plan(out.scenario.request, *predictor, cfg, derive(seed, 3));
  } else {
    throw ConfigError("unknown method '" + method + "'");
  }

  auto & r = out.record;
  r.feasible = out.result.feasible;
  r.success = r.feasible && out.result.wall_ms <= config.success_budget_ms;
  r.min_clearance = out.result.min_clearance;
  r.steps_to_merge = out.result.steps_to_merge;
  r.wall_ms = out.result.wall_ms;
  r.rounds = out.result.rounds;
  r.modifications = out.result.modifications;
  return out;
}

Aggregates summarize(const std::vector<TrialRecord> & records)
{
  Aggregates a;
  a.trials = static_cast<int>(records.size());
  std::vector<double> clearances;
  std::vector<double> steps;
  std::vector<double> times;
  for (const auto & r : records) {
    a.errors += r.error.empty() ? 0 : 1;
    a.successes += r.success ? 1 : 0;
    if (r.feasible) {
      ++a.feasible;
      clearances.push_back(r.min_clearance);
      steps.push_back(r.steps_to_merge);
    }
    if (r.error.empty()) {
      times.push_back(r.wall_ms);
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  a.success_rate = a.trials == 0 ? 0.0 : 100.0 * a.successes / a.trials;
  a.mean_clearance = clearances.empty()
                       ? nan
                       : std::accumulate(clearances.begin(), clearances.end(), 0.0) /
                           static_cast<double>(clearances.size());
  a.median_steps = median(steps);
  a.mean_ms = times.empty() ? nan
                            : std::accumulate(times.begin(), times.end(), 0.0) /
                                static_cast<double>(times.size());
  a.median_ms = median(times);
  return a;
}

ExperimentReport run_batch(const ScenarioConfig & config, const std::string & method, int trials)
{
  if (trials < 1) {
    throw ConfigError("trials must be >= 1");
  }
  ExperimentReport rep;
  rep.scenario = config.name;
  rep.method = method;
  rep.predictor = predictor_name(config.predictor);
  rep.particles = method == "pso" ? config.planner.swarm.particles : 0;
  rep.master_seed = config.master_seed;
  rep.success_budget_ms = config.success_budget_ms;
  rep.records.resize(static_cast<std::size_t>(trials));

  const auto one = [&](std::size_t i) {
    const auto seed = trial_seed(config.master_seed, i);
    try {
      rep.records[i] = run_trial(config, method, seed, i).record;
    } catch (const std::exception & e) {
      TrialRecord r;
      r.index = i;
      r.seed = seed;
      r.method = method;
      r.particles = rep.particles;
      r.error = e.what();
      rep.records[i] = std::move(r);
    }
  };

  const auto n = static_cast<std::size_t>(trials);
  const auto jobs = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), n);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      one(i);
    }
  } else {
    // Parallel trials compete for cores, so wall times (and with them successes) are only
    // comparable between runs with the same job count.
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          one(i);
        }
      });
    }
    for (auto & t : pool) {
      t.join();
    }
  }
  rep.summary = summarize(rep.records);
  return rep;
}

std::vector<ExperimentReport> particle_sweep(
  const ScenarioConfig & config, const std::vector<int> & counts, int trials)
{
  std::vector<ExperimentReport> out;
  for (int p : counts) {
    auto c = config;
    c.planner.swarm.particles = p;
    c.validate();
    out.push_back(run_batch(c, "pso", trials));
  }
  return out;
}

// ---- export ------------------------------------------------------------------------------

void write_trajectory_csv(const std::filesystem::path & path, const planner::PlanResult & result)
{
  auto out = open_out(path);
  out << "t,x,y,v,psi,delta\n";
  const auto & s = result.trajectory.states;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double t = static_cast<double>(k) * result.trajectory.dt;
    out << fmt::format("{},{},{},{},{},", num(t), num(s[k].x), num(s[k].y), num(s[k].v), num(s[k].psi));
    if (k < result.steering.size() && k + 1 < s.size()) {
      out << num(result.steering[k]);
    }
    out << '\n';
  }
}

void write_predictions_csv(
  const std::filesystem::path & path, const planner::PlanResult & result, std::size_t steps,
  geometry::Padding padding)
{
  auto out = open_out(path);
  out << "vehicle,step,t,x,y\n";
  const double dt = result.predictions.dt;
  for (std::size_t i = 0; i < result.predictions.tracks.size(); ++i) {
    const auto padded = geometry::pad_track(result.predictions.tracks[i], steps, padding);
    for (std::size_t k = 0; k < padded.size(); ++k) {
      out << fmt::format("{},{},{},{},{}\n", i, k + 1, num(static_cast<double>(k + 1) * dt),
        num(padded[k].x), num(padded[k].y));
    }
  }
}

void write_trace_jsonl(
  const std::filesystem::path & path, const std::vector<pso::IterationRecord> & trace)
{
  auto out = open_out(path);
  for (const auto & r : trace) {
    nlohmann::json costs = nlohmann::json::array();
    for (double c : r.particle_costs) {
      costs.push_back(std::isfinite(c) ? nlohmann::json(c) : nlohmann::json(nullptr));
    }
    const nlohmann::json j = {{"round", r.round}, {"iteration", r.iteration},
      {"particle_costs", costs},
      {"global_best", std::isfinite(r.global_best) ? nlohmann::json(r.global_best) : nlohmann::json(nullptr)},
      {"global_best_terms", terms_json(r.global_best_terms)}};
    out << j.dump() << '\n';
  }
}

void write_result_json(const std::filesystem::path & path, const TrialOutcome & outcome)
{
  const auto & res = outcome.result;
  const auto & req = outcome.scenario.request;
  nlohmann::json others = nlohmann::json::array();
  for (const auto & s : outcome.scenario.others) {
    others.push_back({{"x", s.x}, {"y", s.y}, {"v", s.v}});
  }
  nlohmann::json j = record_json(outcome.record);
  j["scenario_seed"] = outcome.scenario.seed;
  j["ego"] = {{"x", req.ego.x}, {"y", req.ego.y}, {"psi", req.ego.psi}, {"v", req.ego.v}};
  j["target"] = {{"x", req.target_x}, {"y", req.target_y}, {"heading", req.target_heading}};
  j["others"] = others;
  j["cost"] = terms_json(res.evaluation.terms);
  j["collision"] = res.evaluation.collision;
  j["lane_violation"] = res.evaluation.lane_violation;
  j["terminal_offset"] = res.evaluation.terminal_offset;
  j["round_costs"] = res.round_costs;
  j["first_feasible_round"] = res.first_feasible_round;
  if (res.method == "mc") {
    j["target_shift"] = res.target_shift;
  }
  j["steering"] = res.steering;
  j["accel"] = res.accel;
  if (!res.diagnostic.empty()) {
    j["diagnostic"] = res.diagnostic;
  }
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_report_json(
  const std::filesystem::path & path, const std::vector<ExperimentReport> & reports)
{
  nlohmann::json arr = nlohmann::json::array();
  for (const auto & r : reports) {
    nlohmann::json trials = nlohmann::json::array();
    for (const auto & t : r.records) {
      trials.push_back(record_json(t));
    }
    arr.push_back({{"scenario", r.scenario}, {"method", r.method}, {"predictor", r.predictor},
      {"particles", r.particles}, {"master_seed", r.master_seed},
      {"success_budget_ms", r.success_budget_ms}, {"summary", aggregates_json(r.summary)},
      {"trials", trials}});
  }
  auto out = open_out(path);
  out << arr.dump(2) << '\n';
}

void export_run(const std::filesystem::path & dir, const TrialOutcome & outcome,
  const ScenarioConfig & config)
{
  std::filesystem::create_directories(dir);
  write_trajectory_csv(dir / "trajectory.csv", outcome.result);
  write_predictions_csv(dir / "predictions.csv", outcome.result,
    static_cast<std::size_t>(config.horizon), config.planner.padding);
  write_trace_jsonl(dir / "trace.jsonl", outcome.result.trace);
  write_result_json(dir / "result.json", outcome);
}

}  // namespace lcpso::harness
