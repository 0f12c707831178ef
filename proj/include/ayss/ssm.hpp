#pragma once

// Surrogate safety measures and the adversarial-yet-safe reward.

#include <Eigen/Core>

#include "ayss/sim.hpp"

namespace ayss::ssm {

/// Piecewise-linear headway reward: peak 1 at peak_h, zero at and beyond zero_h.
struct RewardShape {
  double peak_h = 0.25;
  double zero_h = 20.0;
};

struct RewardConfig {
  double alpha_A = 1.0;
  double alpha_C = 25.0;
  sim::Case scenario_case = sim::Case::one_lane;
  RewardShape same_lane{0.25, 20.0};   // one-lane shape, reused for a shared lane
  RewardShape lane_change{1.0, 5.0};   // while the POV is changing lanes

  void validate() const;
};

double adversarial_reward(double h, double peak_h, double zero_h);
inline double adversarial_reward(double h, const RewardShape& s) {
  return adversarial_reward(h, s.peak_h, s.zero_h);
}

/// alpha_A R_A + alpha_C R_C for the world after a step.
double step_reward(const sim::WorldState& world, const sim::RoadConfig& road,
                   const RewardConfig& config);

sim::RewardFn make_reward_fn(const sim::RoadConfig& road, const RewardConfig& config);

/// 1-D time to collision; +inf without closing speed, 0 when already in contact.
double ttc_1d(double h, double v_follower, double v_leader);

/// Scalar projection of the relative velocity onto the relative position.
/// Negative when the two bodies approach each other.
double delta_v_bar(const Eigen::Vector2d& p_rel, const Eigen::Vector2d& v_rel);

}  // namespace ayss::ssm
