#include "ayss/sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ayss/error.hpp"

namespace ayss {

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument(std::string(what) + " is not finite");
  }
}

}  // namespace ayss

namespace ayss::sim {

std::string_view to_string(Case c) { return c == Case::one_lane ? "one_lane" : "two_lane"; }

Case case_from_string(std::string_view name) {
  if (name == "one_lane") return Case::one_lane;
  if (name == "two_lane") return Case::two_lane;
  throw ConfigError("unknown case '" + std::string(name) + "' (expected one_lane or two_lane)");
}

void RoadConfig::validate() const {
  if (lane_count != 1 && lane_count != 2) throw ConfigError("road.lane_count must be 1 or 2");
  if (!(lane_width > 0.0)) throw ConfigError("road.lane_width must be positive");
  if (!(speed_limit > 0.0)) throw ConfigError("road.speed_limit must be positive");
}

double RoadConfig::lane_center(int lane) const {
  if (lane < 0 || lane >= lane_count) {
    throw std::out_of_range("lane index " + std::to_string(lane) + " outside road with " +
                            std::to_string(lane_count) + " lane(s)");
  }
  return lane * lane_width;
}

int RoadConfig::lane_of(double y) const {
  const int lane = static_cast<int>(std::lround(y / lane_width));
  return std::clamp(lane, 0, lane_count - 1);
}

RoadConfig RoadConfig::for_case(Case c) {
  RoadConfig road;
  road.lane_count = c == Case::one_lane ? 1 : 2;
  return road;
}

namespace {

void validate_interval(const Interval& iv, const char* name) {
  if (!std::isfinite(iv.low) || !std::isfinite(iv.high)) {
    throw ConfigError(std::string(name) + " bounds must be finite");
  }
  if (iv.low > iv.high) throw ConfigError(std::string(name) + " has low > high");
}

void validate_odd(const OddBounds& odd, double speed_limit, const char* name) {
  const std::string prefix(name);
  validate_interval(odd.vut_speed, (prefix + ".vut_speed").c_str());
  validate_interval(odd.pov_speed, (prefix + ".pov_speed").c_str());
  validate_interval(odd.gap, (prefix + ".gap").c_str());
  for (const Interval* iv : {&odd.vut_speed, &odd.pov_speed}) {
    if (iv->low < 0.0 || iv->high > speed_limit) {
      throw ConfigError(prefix + " speeds must lie within [0, speed_limit]");
    }
  }
}

}  // namespace

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("sim.dt must be positive");
  if (episode_len < 1) throw ConfigError("sim.episode_len must be at least 1");
  if (substeps < 1) throw ConfigError("sim.substeps must be at least 1");
  validate_interval(accel_bounds, "sim.accel_bounds");
  if (!(accel_bounds.low < 0.0 && accel_bounds.high > 0.0)) {
    throw ConfigError("sim.accel_bounds must straddle zero");
  }
  if (!(speed_cap > 0.0)) throw ConfigError("sim.speed_cap must be positive");
  if (!(kp_speed > 0.0) || !(k_lat > 0.0) || !(k_head > 0.0)) {
    throw ConfigError("sim controller gains must be positive");
  }
  if (!(max_heading > 0.0) || !(max_steer > 0.0) || max_steer >= std::numbers::pi / 2) {
    throw ConfigError("sim.max_heading/max_steer out of range");
  }
  if (!(vehicle_length > 0.0) || !(vehicle_width > 0.0)) {
    throw ConfigError("sim vehicle dimensions must be positive");
  }
  if (disturbance_amplitude != 0.0) {
    throw ConfigError("sim.disturbance_amplitude is reserved and must be 0");
  }
  validate_odd(one_lane_odd, speed_cap, "sim.one_lane_odd");
  validate_odd(two_lane_odd, speed_cap, "sim.two_lane_odd");
}

const OddBounds& SimConfig::odd(Case c) const {
  return c == Case::one_lane ? one_lane_odd : two_lane_odd;
}

// ---------------------------------------------------------------------------

int action_count(Case c) { return c == Case::one_lane ? 21 : 42; }

PovCommand decode_action(Case c, int action, double pov_speed) {
  if (action < 0 || action >= action_count(c)) {
    throw std::out_of_range("POV action index " + std::to_string(action) + " outside [0, " +
                            std::to_string(action_count(c)) + ")");
  }
  if (c == Case::one_lane) return {false, 0.5 * action * pov_speed};
  if (action == kLaneChangeAction) return {true, 0.0};
  return {false, static_cast<double>(action - 1)};
}

VehicleState step_vehicle(const VehicleState& state, double accel, double steer, double dt,
                          const SimConfig& config) {
  require_finite(accel, "acceleration");
  require_finite(steer, "steering angle");
  require_finite(dt, "time step");
  require_finite(state.x, "vehicle x");
  require_finite(state.y, "vehicle y");
  require_finite(state.v, "vehicle speed");
  require_finite(state.heading, "vehicle heading");
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  constexpr double kSlack = 1e-9;
  if (accel < config.accel_bounds.low - kSlack || accel > config.accel_bounds.high + kSlack) {
    throw std::invalid_argument("acceleration " + std::to_string(accel) +
                                " outside the configured bounds");
  }
  if (std::abs(steer) > config.max_steer + kSlack) {
    throw std::invalid_argument("steering angle " + std::to_string(steer) +
                                " exceeds the configured maximum");
  }

  VehicleState next = state;
  next.v = std::clamp(state.v + accel * dt, 0.0, config.speed_cap);
  // Slip angle at the center of gravity, rear axle at length/2.
  const double beta = std::atan(0.5 * std::tan(steer));
  next.x = state.x + next.v * std::cos(state.heading + beta) * dt;
  next.y = state.y + next.v * std::sin(state.heading + beta) * dt;
  next.heading = state.heading + next.v * std::sin(beta) / (0.5 * state.length) * dt;
  return next;
}

double speed_controller(double current_v, double target_v, const SimConfig& config) {
  require_finite(current_v, "current speed");
  require_finite(target_v, "target speed");
  return std::clamp(config.kp_speed * (target_v - current_v), config.accel_bounds.low,
                    config.accel_bounds.high);
}

double lane_change_controller(const VehicleState& state, int target_lane, const RoadConfig& road,
                              const SimConfig& config) {
  const double y_target = road.lane_center(target_lane);
  const double heading_target =
      std::clamp(config.k_lat * (y_target - state.y), -config.max_heading, config.max_heading);
  return std::clamp(config.k_head * (heading_target - state.heading), -config.max_steer,
                    config.max_steer);
}

bool lane_change_complete(const VehicleState& state, int target_lane, const RoadConfig& road) {
  return std::abs(state.y - road.lane_center(target_lane)) < 0.1 &&
         std::abs(state.heading) < 0.02;
}

namespace {

using Corners = std::array<std::array<double, 2>, 4>;

Corners corners(const VehicleState& s) {
  const double c = std::cos(s.heading);
  const double sn = std::sin(s.heading);
  const double hl = 0.5 * s.length;
  const double hw = 0.5 * s.width;
  Corners out;
  const double sx[4] = {hl, hl, -hl, -hl};
  const double sy[4] = {hw, -hw, -hw, hw};
  for (int i = 0; i < 4; ++i) {
    out[i] = {s.x + sx[i] * c - sy[i] * sn, s.y + sx[i] * sn + sy[i] * c};
  }
  return out;
}

// Projection interval of a rectangle on an axis.
std::pair<double, double> project(const Corners& pts, double ax, double ay) {
  double lo = pts[0][0] * ax + pts[0][1] * ay;
  double hi = lo;
  for (int i = 1; i < 4; ++i) {
    const double p = pts[i][0] * ax + pts[i][1] * ay;
    lo = std::min(lo, p);
    hi = std::max(hi, p);
  }
  return {lo, hi};
}

}  // namespace

bool detect_collision(const VehicleState& a, const VehicleState& b) {
  const Corners ca = corners(a);
  const Corners cb = corners(b);
  const double axes[4][2] = {{std::cos(a.heading), std::sin(a.heading)},
                             {-std::sin(a.heading), std::cos(a.heading)},
                             {std::cos(b.heading), std::sin(b.heading)},
                             {-std::sin(b.heading), std::cos(b.heading)}};
  for (const auto& axis : axes) {
    const auto [alo, ahi] = project(ca, axis[0], axis[1]);
    const auto [blo, bhi] = project(cb, axis[0], axis[1]);
    if (ahi < blo || bhi < alo) return false;  // separating axis
  }
  return true;
}

double headway(const VehicleState& vut, const VehicleState& pov) {
  return (pov.x - 0.5 * pov.length) - (vut.x + 0.5 * vut.length);
}

bool collision_unavoidable(const InitialCondition& ic, const SimConfig& config) {
  // Best escape: VUT brakes at the lower bound, POV accelerates as hard as its
  // action space allows (one-lane: 10 v', capped by the speed controller).
  const double h = config.dt / config.substeps;
  double gap = ic.gap;
  double v = ic.vut_speed;
  double vp = ic.pov_speed;
  if (gap <= 0.0) return true;
  for (int k = 0; k < config.episode_len * config.substeps; ++k) {
    const double target = std::min(10.0 * vp, config.speed_cap);
    const double ap = speed_controller(vp, target, config);
    v = std::clamp(v + config.accel_bounds.low * h, 0.0, config.speed_cap);
    vp = std::clamp(vp + ap * h, 0.0, config.speed_cap);
    gap += (vp - v) * h;
    if (gap <= 0.0) return true;
    if (v <= vp) return false;  // no longer closing
  }
  return false;
}

InitialCondition sample_initial_condition(Rng& rng, const SimConfig& config, Case c) {
  const OddBounds& odd = config.odd(c);
  validate_interval(odd.vut_speed, "odd.vut_speed");
  validate_interval(odd.pov_speed, "odd.pov_speed");
  validate_interval(odd.gap, "odd.gap");
  // Rejection is bounded so that a pathological ODD fails loudly.
  for (int attempt = 0; attempt < 10000; ++attempt) {
    InitialCondition ic;
    ic.vut_speed = uniform(rng, odd.vut_speed.low, odd.vut_speed.high);
    ic.pov_speed = uniform(rng, odd.pov_speed.low, odd.pov_speed.high);
    ic.gap = uniform(rng, odd.gap.low, odd.gap.high);
    // Two-lane: the POV starts on the lane left of the VUT.
    ic.pov_lane = c == Case::one_lane ? 0 : 1;
    if (!odd.reject_unavoidable || !collision_unavoidable(ic, config)) return ic;
  }
  throw ConfigError("ODD bounds admit no collision-avoidable initial condition");
}

WorldState make_world(const InitialCondition& ic, const RoadConfig& road, const SimConfig& config) {
  WorldState w;
  w.vut.length = w.pov.length = config.vehicle_length;
  w.vut.width = w.pov.width = config.vehicle_width;
  w.vut.x = 0.0;
  w.vut.y = road.lane_center(0);
  w.vut.v = ic.vut_speed;
  w.pov.x = ic.gap + 0.5 * (w.vut.length + w.pov.length);
  w.pov.y = road.lane_center(ic.pov_lane);
  w.pov.v = ic.pov_speed;
  w.pov_lane = ic.pov_lane;
  w.pov_target_speed = ic.pov_speed;
  w.collided = detect_collision(w.vut, w.pov);
  return w;
}

Observation observe(const WorldState& world, const RoadConfig& road, Case c) {
  Observation obs;
  obs.pov_speed = world.pov.v;
  obs.vut_speed = world.vut.v;
  obs.headway = headway(world.vut, world.pov);
  if (c == Case::two_lane) {
    obs.dim = 4;
    obs.same_lane = road.lane_of(world.pov.y) == road.lane_of(world.vut.y) ? 1.0 : 0.0;
  }
  return obs;
}

// ---------------------------------------------------------------------------

Environment::Environment(Scene scene) : scene_(std::move(scene)) {
  scene_.road.validate();
  scene_.sim.validate();
  if (!scene_.vut) throw std::invalid_argument("environment needs a VUT policy");
  if (!scene_.reward) throw std::invalid_argument("environment needs a reward function");
  const int lanes = scene_.scenario_case == Case::one_lane ? 1 : 2;
  if (scene_.road.lane_count != lanes) {
    throw ConfigError("road lane_count does not match the scenario case");
  }
}

void Environment::reset(const InitialCondition& ic) {
  world_ = make_world(ic, scene_.road, scene_.sim);
  over_ = world_.collided;
}

Observation Environment::observation() const {
  return observe(world_, scene_.road, scene_.scenario_case);
}

LeadObservation Environment::vut_view() const {
  // The POV leads once its center is ahead and its footprint enters the VUT's
  // lane (lateral center within half a width of the lane boundary).
  LeadObservation view;
  view.v = world_.vut.v;
  const VehicleState& vut = world_.vut;
  const VehicleState& pov = world_.pov;
  const double encroach = 0.5 * scene_.road.lane_width + 0.5 * pov.width;
  if (pov.x > vut.x && std::abs(pov.y - vut.y) <= encroach) {
    view.v_lead = pov.v;
    view.gap = headway(vut, pov);
  }
  return view;
}

StepOutcome Environment::step(int action) {
  if (over_) throw std::logic_error("step() called on a finished episode; call reset()");
  const Case c = scene_.scenario_case;
  const PovCommand cmd = decode_action(c, action, world_.pov.v);
  if (cmd.lane_change) {
    if (!world_.pov_lane_change) {
      const int target = 1 - world_.pov_lane;
      world_.pov_lane_change = LaneChange{target, world_.pov.y, 0.0};
      world_.pov_lane = target;
      world_.pov_started_lane_change = true;
    }
  } else {
    world_.pov_target_speed = std::min(cmd.target_speed, scene_.sim.speed_cap);
  }

  const SimConfig& cfg = scene_.sim;
  const double h = cfg.dt / cfg.substeps;
  for (int k = 0; k < cfg.substeps && !world_.collided; ++k) {
    const double raw = scene_.vut(vut_view());
    require_finite(raw, "VUT acceleration");
    const double vut_accel = std::clamp(raw, cfg.accel_bounds.low, cfg.accel_bounds.high);
    const double pov_accel = speed_controller(world_.pov.v, world_.pov_target_speed, cfg);
    const double pov_steer = lane_change_controller(world_.pov, world_.pov_lane, scene_.road, cfg);

    world_.vut = step_vehicle(world_.vut, vut_accel, 0.0, h, cfg);
    world_.pov = step_vehicle(world_.pov, pov_accel, pov_steer, h, cfg);

    if (world_.pov_lane_change) {
      LaneChange& lc = *world_.pov_lane_change;
      const double span = scene_.road.lane_center(lc.target_lane) - lc.start_y;
      lc.progress = std::clamp((world_.pov.y - lc.start_y) / span, 0.0, 1.0);
      if (lane_change_complete(world_.pov, lc.target_lane, scene_.road)) {
        world_.pov_lane_change.reset();
      }
    }
    if (detect_collision(world_.vut, world_.pov)) world_.collided = true;
  }
  ++world_.time_step;

  StepOutcome out;
  out.reward = scene_.reward(world_);
  out.collided = world_.collided;
  over_ = world_.collided || world_.time_step >= cfg.episode_len;
  out.episode_over = over_;
  out.next_obs = observation();
  return out;
}

EpisodeResult run_episode(const Scene& scene, const InitialCondition& ic, const PovPolicy& pov) {
  Environment env(scene);
  env.reset(ic);
  EpisodeResult result;
  result.transitions.reserve(scene.sim.episode_len);
  while (!env.episode_over()) {
    Transition t;
    t.obs = env.observation();
    t.action = pov(t.obs);
    const StepOutcome out = env.step(t.action);
    t.reward = out.reward;
    t.next_obs = out.next_obs;
    t.done = out.collided;
    result.summary.episode_reward += out.reward;
    result.transitions.push_back(t);
    result.trace.push_back(env.world());
  }
  const WorldState& w = env.world();
  result.summary.collided = w.collided;
  result.summary.steps = w.time_step;
  result.summary.final_headway = headway(w.vut, w.pov);
  result.summary.lane_changed = w.pov_started_lane_change;
  return result;
}

}  // namespace ayss::sim
