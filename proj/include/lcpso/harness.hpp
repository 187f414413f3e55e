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

#ifndef LCPSO__HARNESS_HPP_
#define LCPSO__HARNESS_HPP_

#include "lcpso/planner.hpp"
#include "lcpso/prediction.hpp"
#include "lcpso/types.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lcpso::harness
{

/// Raised for unreadable, malformed or inconsistent scenario files. The message starts with
/// "<source>:<line>:" whenever the offending entry can be located.
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Seeding could not place the traffic without overlaps.
class SpawnError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Uniform ranges for one surrounding vehicle. Degenerate ranges fix the value.
struct VehicleSpawn
{
  int lane{0};
  double x_min{0.0};
  double x_max{0.0};
  double speed_min{10.0};
  double speed_max{10.0};
};

enum class PredictorKind
{
  idm_mobil,
  constant_velocity,
};

struct ScenarioConfig
{
  std::string name{"scenario"};
  std::string source{"<defaults>"};
  std::uint64_t seed{1};

  double dt{0.1};
  int horizon{30};            // N
  int observation_steps{8};   // N_obs
  int prediction_steps{12};   // N_pred

  LaneLayout lanes;
  VehicleGeometry vehicle;

  double ego_x{0.0};
  int ego_lane{1};
  double ego_speed{10.0};
  int target_lane{0};
  double target_distance{20.0};

  std::vector<VehicleSpawn> traffic;
  int max_spawn_attempts{1000};

  PredictorKind predictor{PredictorKind::idm_mobil};
  prediction::IdmParams idm;
  prediction::MobilParams mobil;

  planner::PlannerConfig planner;

  std::string method{"pso"};
  int trials{50};
  std::uint64_t master_seed{1};
  double success_budget_ms{200.0};
  int jobs{1};
  std::vector<int> sweep_particles{1, 2, 3, 4, 5};

  /// Cross-field checks; throws ConfigError.
  void validate() const;
  /// Vehicles including the ego.
  std::size_t vehicle_count() const { return traffic.size() + 1; }
};

/// Parses TOML text. `source` names the text in error messages.
ScenarioConfig parse_config(std::string_view text, const std::string & source);

/// Reads and parses a scenario file.
ScenarioConfig load_config(const std::filesystem::path & path);

/// Turns a name or path into a file: existing paths are used as given, otherwise the name is
/// looked up (with and without a .toml suffix) in `config_dir`.
std::filesystem::path resolve_config(
  const std::string & name_or_path, const std::filesystem::path & config_dir);

struct Scenario
{
  std::uint64_t seed{0};
  planner::PlanRequest request;
  std::vector<VehicleState> others;  // initial states of the surrounding vehicles
};

/// Instantiates the scenario for `seed`: samples the traffic inside the spawn ranges until no two
/// vehicles overlap and every vehicle clears the ego by the safety buffer, then synthesizes the
/// observation history by running each vehicle backwards at its sampled speed.
Scenario build_scenario(const ScenarioConfig & config, std::uint64_t seed);
inline Scenario build_scenario(const ScenarioConfig & config)
{
  return build_scenario(config, config.seed);
}

std::unique_ptr<prediction::Predictor> make_predictor(const ScenarioConfig & config);

/// Independent per-trial seed derived from a master seed.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t index);

struct TrialRecord
{
  std::size_t index{0};
  std::uint64_t seed{0};
  std::string method;
  int particles{0};
  bool feasible{false};
  bool success{false};  // feasible and within the success budget
  double min_clearance{0.0};
  int steps_to_merge{0};
  double wall_ms{0.0};
  int rounds{0};
  int modifications{0};
  std::string error;
};

struct TrialOutcome
{
  TrialRecord record;
  Scenario scenario;
  planner::PlanResult result;
};

/// Builds the scenario for `seed` and plans it with `method` ("pso" or "mc").
TrialOutcome run_trial(
  const ScenarioConfig & config, const std::string & method, std::uint64_t seed,
  std::size_t index = 0);

struct Aggregates
{
  int trials{0};
  int feasible{0};
  int successes{0};
  int errors{0};
  double success_rate{0.0};    // percent
  double mean_clearance{0.0};  // over feasible trials; NaN when there are none
  double median_steps{0.0};    // over feasible trials; NaN when there are none
  double mean_ms{0.0};
  double median_ms{0.0};
};

Aggregates summarize(const std::vector<TrialRecord> & records);

struct ExperimentReport
{
  std::string scenario;
  std::string method;
  std::string predictor;
  int particles{0};
  std::uint64_t master_seed{0};
  double success_budget_ms{0.0};
  std::vector<TrialRecord> records;
  Aggregates summary;
};

/// Runs `trials` independent trials, in parallel when config.jobs > 1. Trial i always uses
/// trial_seed(master_seed, i), so reports are reproducible and comparable across settings.
/// Exceptions inside a trial are recorded as failed trials.
ExperimentReport run_batch(const ScenarioConfig & config, const std::string & method, int trials);

/// One PSO batch per particle count, all on the same trial seeds.
std::vector<ExperimentReport> particle_sweep(
  const ScenarioConfig & config, const std::vector<int> & counts, int trials);

std::string predictor_name(PredictorKind kind);

// ---- export ----------------------------------------------------------------------------

/// t,x,y,v,psi,delta; delta is the steering applied from that state on (empty on the last row).
void write_trajectory_csv(const std::filesystem::path & path, const planner::PlanResult & result);

/// vehicle,step,t,x,y for steps 1..N, padded past the predictor horizon the way the planner
/// pads them for the clearance check.
void write_predictions_csv(
  const std::filesystem::path & path, const planner::PlanResult & result, std::size_t steps,
  geometry::Padding padding);

/// One JSON object per swarm iteration.
void write_trace_jsonl(
  const std::filesystem::path & path, const std::vector<pso::IterationRecord> & trace);

void write_result_json(const std::filesystem::path & path, const TrialOutcome & outcome);

void write_report_json(
  const std::filesystem::path & path, const std::vector<ExperimentReport> & reports);

/// trajectory.csv, predictions.csv, trace.jsonl and result.json in `dir`.
void export_run(const std::filesystem::path & dir, const TrialOutcome & outcome,
  const ScenarioConfig & config);

}  // namespace lcpso::harness

#endif  // LCPSO__HARNESS_HPP_
