#include "ayss/ssm.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ayss/error.hpp"

namespace ayss::ssm {

namespace {

void validate_shape(const RewardShape& s, const char* name) {
  if (!(0.0 < s.peak_h && s.peak_h < s.zero_h) || !std::isfinite(s.zero_h)) {
    throw ConfigError(std::string(name) + ": need 0 < peak_h < zero_h");
  }
}

}  // namespace

void RewardConfig::validate() const {
  if (!(alpha_A > 0.0) || !(alpha_C > 0.0)) throw ConfigError("reward weights must be positive");
  validate_shape(same_lane, "reward.same_lane");
  validate_shape(lane_change, "reward.lane_change");
}

double adversarial_reward(double h, double peak_h, double zero_h) {
  require_finite(h, "headway");
  if (h <= 0.0 || h >= zero_h) return 0.0;
  if (h <= peak_h) return h / peak_h;
  return (zero_h - h) / (zero_h - peak_h);
}

double step_reward(const sim::WorldState& world, const sim::RoadConfig& road,
                   const RewardConfig& config) {
  if (world.collided) return -config.alpha_C;
  const double h = sim::headway(world.vut, world.pov);
  if (config.scenario_case == sim::Case::one_lane) {
    return config.alpha_A * adversarial_reward(h, config.same_lane);
  }
  if (world.pov_lane_change) return config.alpha_A * adversarial_reward(h, config.lane_change);
  if (road.lane_of(world.pov.y) == road.lane_of(world.vut.y)) {
    return config.alpha_A * adversarial_reward(h, config.same_lane);
  }
  return 0.0;
}

sim::RewardFn make_reward_fn(const sim::RoadConfig& road, const RewardConfig& config) {
  config.validate();
  return [road, config](const sim::WorldState& w) { return step_reward(w, road, config); };
}

double ttc_1d(double h, double v_follower, double v_leader) {
  if (h <= 0.0) return 0.0;
  const double closing = v_follower - v_leader;
  if (closing <= 0.0) return std::numeric_limits<double>::infinity();
  return h / closing;
}

double delta_v_bar(const Eigen::Vector2d& p_rel, const Eigen::Vector2d& v_rel) {
  const double norm = p_rel.norm();
  if (!(norm > 0.0)) throw std::invalid_argument("delta_v_bar: vehicles coincide");
  return p_rel.dot(v_rel) / norm;
}

}  // namespace ayss::ssm
