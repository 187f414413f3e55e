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

#ifndef LCPSO__PREDICTION_HPP_
#define LCPSO__PREDICTION_HPP_

#include "lcpso/types.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace lcpso::prediction
{

/// Past positions of the surrounding vehicles, [vehicle][k], oldest first, most recent last.
struct ObservationMatrix
{
  double dt{0.1};
  std::vector<std::vector<Vec2>> tracks;

  std::size_t vehicles() const { return tracks.size(); }
  std::size_t steps() const { return tracks.empty() ? 0 : tracks.front().size(); }
  /// Throws ContractError unless every vehicle has the same number of observations.
  void validate() const;
};

/// Predicted positions, [vehicle][k] for k = 1..steps() after the last observation.
struct PredictionMatrix
{
  double dt{0.1};
  std::vector<std::vector<Vec2>> tracks;

  std::size_t vehicles() const { return tracks.size(); }
  std::size_t steps() const { return tracks.empty() ? 0 : tracks.front().size(); }
};

/// Maps observations (and the ego vehicle's intended plan) to predicted positions.
///
/// The ego plan is a trajectory whose states[0] coincides in time with the last observation.
/// Implementations must return exactly horizon() steps for every observed vehicle and must be
/// deterministic and free of shared mutable state, since planners call them concurrently.
class Predictor
{
public:
  virtual ~Predictor() = default;
  virtual PredictionMatrix predict(
    const ObservationMatrix & obs, const Trajectory & ego_plan) const = 0;
  virtual std::size_t horizon() const = 0;
  virtual std::string name() const = 0;
  /// False when predictions never depend on the ego plan.
  virtual bool interactive() const { return false; }
};

PredictionMatrix constant_velocity_predict(
  const ObservationMatrix & obs, const Trajectory & ego_plan, std::size_t horizon);

class ConstantVelocityPredictor : public Predictor
{
public:
  explicit ConstantVelocityPredictor(std::size_t horizon) : horizon_(horizon) {}
  PredictionMatrix predict(const ObservationMatrix & obs, const Trajectory & ego_plan) const override;
  std::size_t horizon() const override { return horizon_; }
  std::string name() const override { return "constant_velocity"; }

private:
  std::size_t horizon_;
};

struct IdmParams
{
  double desired_speed{15.0};    // v0 [m/s]
  double time_headway{1.0};      // T [s]
  double min_gap{2.0};           // s0 [m]
  double max_accel{1.5};         // a [m/s^2]
  double comfortable_decel{2.0}; // b [m/s^2]
  double exponent{4.0};          // delta
};

struct MobilParams
{
  double politeness{0.3};
  double threshold{0.1};            // [m/s^2]
  double safe_decel{3.0};           // b_safe [m/s^2]
  double lane_change_duration{3.0}; // [s] lateral transition time
  bool enabled{true};
};

/// IDM acceleration for speed v behind a leader `gap` metres ahead (bumper to bumper) moving
/// at lead_speed. A non-finite gap means free road.
double idm_acceleration(double v, double gap, double lead_speed, const IdmParams & p);

/// Everything the IDM/MOBIL rollout needs besides the observations.
struct TrafficModel
{
  LaneLayout lanes;
  IdmParams idm;
  MobilParams mobil;
  VehicleGeometry ego_geometry;
  std::vector<VehicleGeometry> geometries;  // one per observed vehicle
};

/// Rolls every observed vehicle forward with IDM car following and MOBIL lane changes, with the
/// ego plan treated as a road user that followers react to once its body enters their lane.
PredictionMatrix idm_mobil_predict(
  const ObservationMatrix & obs, const Trajectory & ego_plan, const TrafficModel & model,
  std::size_t horizon);

class IdmMobilPredictor : public Predictor
{
public:
  IdmMobilPredictor(std::size_t horizon, TrafficModel model)
  : horizon_(horizon), model_(std::move(model))
  {
  }
  PredictionMatrix predict(const ObservationMatrix & obs, const Trajectory & ego_plan) const override;
  std::size_t horizon() const override { return horizon_; }
  std::string name() const override { return "idm_mobil"; }
  bool interactive() const override { return true; }
  const TrafficModel & model() const { return model_; }

private:
  std::size_t horizon_;
  TrafficModel model_;
};

/// Adapter for externally provided models (for example a learned trajectory predictor).
class CallbackPredictor : public Predictor
{
public:
  using Function =
    std::function<PredictionMatrix(const ObservationMatrix &, const Trajectory &)>;

  CallbackPredictor(std::string name, std::size_t horizon, Function fn, bool interactive = true)
  : name_(std::move(name)), horizon_(horizon), fn_(std::move(fn)), interactive_(interactive)
  {
  }
  PredictionMatrix predict(const ObservationMatrix & obs, const Trajectory & ego_plan) const override;
  std::size_t horizon() const override { return horizon_; }
  std::string name() const override { return name_; }
  bool interactive() const override { return interactive_; }

private:
  std::string name_;
  std::size_t horizon_;
  Function fn_;
  bool interactive_;
};

/// Element-wise difference with_ego - without_ego of two predictions of equal shape.
std::vector<std::vector<Vec2>> interactive_gap_response(
  const PredictionMatrix & without_ego, const PredictionMatrix & with_ego);

}  // namespace lcpso::prediction

#endif  // LCPSO__PREDICTION_HPP_
