#pragma once

// Vehicle-under-test policies. Everything outside this module sees a VUT only
// through sim::VutPolicy; the IDM parameters stay private to it.

#include <string>
#include <string_view>
#include <vector>

#include "ayss/sim.hpp"

namespace ayss::vut {

/// Intelligent Driver Model parameters.
struct IDMParams {
  double v0 = 30.0;    // desired speed [m/s]
  double s0 = 10.0;    // minimum spacing [m]
  double T = 1.5;      // desired time headway [s]
  double a_max = 3.0;  // maximum comfortable acceleration [m/s^2]
  double b = 5.0;      // comfortable deceleration [m/s^2]
  double delta = 4.0;

  void validate() const;
};

struct IdmResult {
  double accel = 0.0;
  bool contact = false;  // gap <= 0: IDM is singular, maximum braking returned
};

/// IDM acceleration clamped to accel_bounds. An infinite gap means open road.
IdmResult idm_accel(double v, double v_lead, double gap, const IDMParams& params,
                    const sim::Interval& accel_bounds);

/// Builds the opaque policy for one parameter set.
sim::VutPolicy make_idm_policy(const IDMParams& params, const sim::Interval& accel_bounds);

/// Evaluates the IDM policy for one lead observation (no leader = open road).
double vut_act(const sim::LeadObservation& obs, const IDMParams& params,
               const sim::Interval& accel_bounds);

/// Named VUT specification: "pi1" (s0 = 10 m), "pi2" (s0 = 20 m), or custom.
struct VutSpec {
  std::string id;
  IDMParams params;
};

VutSpec preset(std::string_view id);
bool is_preset(std::string_view id);

}  // namespace ayss::vut
