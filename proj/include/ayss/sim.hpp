#pragma once

// Deterministic 5 Hz highway world: kinematic vehicles, low-level controllers,
// collision checks and episode stepping for the one-lane and two-lane cases.

#include <functional>
#include <numbers>
#include <optional>
#include <string_view>
#include <vector>

#include "ayss/rng.hpp"

namespace ayss::sim {

enum class Case { one_lane, two_lane };

std::string_view to_string(Case c);
Case case_from_string(std::string_view name);

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

/// Straight, longitudinally infinite road. Lane 0 is the rightmost lane and
/// lateral position y grows to the left; lane i is centered at y = i * lane_width.
struct RoadConfig {
  int lane_count = 1;
  double lane_width = 4.0;
  double speed_limit = 30.0;

  void validate() const;
  double lane_center(int lane) const;
  /// Lane whose center is nearest to y, clamped to the road.
  int lane_of(double y) const;

  static RoadConfig for_case(Case c);
};

struct VehicleState {
  double x = 0.0;        // longitudinal position of the center [m]
  double y = 0.0;        // lateral position of the center [m]
  double v = 0.0;        // longitudinal speed [m/s]
  double heading = 0.0;  // [rad], 0 = along the road
  double length = 5.0;
  double width = 2.0;
};

/// POV lane-change maneuver in progress.
struct LaneChange {
  int target_lane = 0;
  double start_y = 0.0;
  double progress = 0.0;  // fraction of lateral distance covered, [0, 1]
};

struct WorldState {
  int time_step = 0;
  VehicleState vut;
  VehicleState pov;
  std::optional<LaneChange> pov_lane_change;
  bool collided = false;
  int pov_lane = 0;               // lane the POV tracks (target lane while changing)
  double pov_target_speed = 0.0;  // held between policy decisions
  bool pov_started_lane_change = false;
};

/// Initial condition sampled from the ODD. gap is bumper to bumper, positive
/// when the POV is ahead of the VUT.
struct InitialCondition {
  double vut_speed = 0.0;
  double pov_speed = 0.0;
  double gap = 0.0;
  int pov_lane = 0;
};

struct OddBounds {
  Interval vut_speed;
  Interval pov_speed;
  Interval gap;
  // Reject draws in which a rear-end collision cannot be avoided even with
  // the VUT braking fully and the POV accelerating fully.
  bool reject_unavoidable = true;
};

struct SimConfig {
  double dt = 0.2;
  int episode_len = 25;
  int substeps = 3;  // integration/control sub-steps per policy step
  Interval accel_bounds{-6.0, 6.0};
  double speed_cap = 40.0;
  double kp_speed = 1.67;
  double k_lat = 0.5;
  double k_head = 3.0;
  double max_heading = std::numbers::pi / 12.0;
  double max_steer = std::numbers::pi / 6.0;
  double lane_change_duration_nominal = 2.0;
  double vehicle_length = 5.0;
  double vehicle_width = 2.0;
  OddBounds one_lane_odd{{20.0, 30.0}, {20.0, 30.0}, {2.0, 8.0}, true};
  OddBounds two_lane_odd{{20.0, 30.0}, {20.0, 30.0}, {2.0, 8.0}, false};
  double disturbance_amplitude = 0.0;  // reserved; the world is deterministic

  void validate() const;
  const OddBounds& odd(Case c) const;
};

/// The POV's view: {v', v, h} in the one-lane case, {v', v, h, l} with the
/// same-lane flag l in the two-lane case.
struct Observation {
  double pov_speed = 0.0;
  double vut_speed = 0.0;
  double headway = 0.0;
  double same_lane = 0.0;
  int dim = 3;
};

/// (x'_t, u'_t, r_t, x'_{t+1}, done). done marks a terminal (collision) step;
/// reaching the episode length is a time limit, not a terminal state.
struct Transition {
  Observation obs;
  int action = 0;
  double reward = 0.0;
  Observation next_obs;
  bool done = false;
};

/// What the VUT's sensors report about its leader, if any.
struct LeadObservation {
  double v = 0.0;
  std::optional<double> v_lead;
  std::optional<double> gap;
};

/// Opaque VUT policy: lead observation -> longitudinal acceleration command.
using VutPolicy = std::function<double(const LeadObservation&)>;
using PovPolicy = std::function<int(const Observation&)>;
using RewardFn = std::function<double(const WorldState&)>;

// ---------------------------------------------------------------------------
// POV action space

/// One-lane: 21 actions, target speed = (0.5 k) * v'. Two-lane: action 0 is
/// lane_change, action 1 + k sets target speed k m/s for k = 0..40.
int action_count(Case c);
inline constexpr int kLaneChangeAction = 0;

struct PovCommand {
  bool lane_change = false;
  double target_speed = 0.0;
};

PovCommand decode_action(Case c, int action, double pov_speed);

// ---------------------------------------------------------------------------
// Primitive operations

/// Semi-implicit Euler step of a kinematic bicycle: speed first, then pose
/// with the new speed. Speed is clamped to [0, speed_cap].
VehicleState step_vehicle(const VehicleState& state, double accel, double steer, double dt,
                          const SimConfig& config);

/// kp_speed * (target - current), clamped to the acceleration bounds.
double speed_controller(double current_v, double target_v, const SimConfig& config);

/// Steering toward the center of target_lane (two-gain heading law).
double lane_change_controller(const VehicleState& state, int target_lane, const RoadConfig& road,
                              const SimConfig& config);

bool lane_change_complete(const VehicleState& state, int target_lane, const RoadConfig& road);

/// True iff the two oriented footprints intersect (touching counts).
bool detect_collision(const VehicleState& a, const VehicleState& b);

/// Bumper-to-bumper longitudinal gap along the road axis; negative when the
/// POV's rear bumper is behind the VUT's front bumper.
double headway(const VehicleState& vut, const VehicleState& pov);

InitialCondition sample_initial_condition(Rng& rng, const SimConfig& config, Case c);

/// True when no POV action can prevent a rear-end collision from this start.
bool collision_unavoidable(const InitialCondition& ic, const SimConfig& config);

WorldState make_world(const InitialCondition& ic, const RoadConfig& road, const SimConfig& config);

Observation observe(const WorldState& world, const RoadConfig& road, Case c);

// ---------------------------------------------------------------------------
// Episodes

struct Scene {
  Case scenario_case = Case::one_lane;
  RoadConfig road;
  SimConfig sim;
  VutPolicy vut;
  RewardFn reward;
};

struct StepOutcome {
  Observation next_obs;
  double reward = 0.0;
  bool collided = false;
  bool episode_over = false;
};

/// Single world instance. Not thread-safe; distinct instances share nothing.
class Environment {
 public:
  explicit Environment(Scene scene);

  void reset(const InitialCondition& ic);
  StepOutcome step(int action);

  Observation observation() const;
  const WorldState& world() const { return world_; }
  const Scene& scene() const { return scene_; }
  bool episode_over() const { return over_; }

 private:
  LeadObservation vut_view() const;

  Scene scene_;
  WorldState world_;
  bool over_ = true;
};

struct EpisodeSummary {
  bool collided = false;
  int steps = 0;
  double final_headway = 0.0;
  double episode_reward = 0.0;
  bool lane_changed = false;
};

struct EpisodeResult {
  std::vector<Transition> transitions;
  std::vector<WorldState> trace;  // world after each step
  EpisodeSummary summary;
};

EpisodeResult run_episode(const Scene& scene, const InitialCondition& ic, const PovPolicy& pov);

}  // namespace ayss::sim
