#include "ayss/vut.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ayss/error.hpp"

namespace ayss::vut {

void IDMParams::validate() const {
  for (double p : {v0, s0, T, a_max, b, delta}) {
    if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("IDM parameters must be positive");
  }
}

IdmResult idm_accel(double v, double v_lead, double gap, const IDMParams& params,
                    const sim::Interval& accel_bounds) {
  require_finite(v, "IDM speed");
  if (std::isnan(gap) || std::isnan(v_lead)) throw std::invalid_argument("IDM input is NaN");
  if (gap <= 0.0) return {accel_bounds.low, true};

  double accel = params.a_max * (1.0 - std::pow(std::max(v, 0.0) / params.v0, params.delta));
  if (std::isfinite(gap)) {
    const double dv = v - v_lead;
    const double s_star =
        params.s0 + std::max(0.0, v * params.T + v * dv / (2.0 * std::sqrt(params.a_max * params.b)));
    const double ratio = s_star / gap;
    accel -= params.a_max * ratio * ratio;
  }
  return {std::clamp(accel, accel_bounds.low, accel_bounds.high), false};
}

double vut_act(const sim::LeadObservation& obs, const IDMParams& params,
               const sim::Interval& accel_bounds) {
  constexpr double kOpenRoad = std::numeric_limits<double>::infinity();
  if (!obs.gap) return idm_accel(obs.v, obs.v, kOpenRoad, params, accel_bounds).accel;
  return idm_accel(obs.v, obs.v_lead.value_or(obs.v), *obs.gap, params, accel_bounds).accel;
}

sim::VutPolicy make_idm_policy(const IDMParams& params, const sim::Interval& accel_bounds) {
  params.validate();
  return [params, accel_bounds](const sim::LeadObservation& obs) {
    return vut_act(obs, params, accel_bounds);
  };
}

bool is_preset(std::string_view id) { return id == "pi1" || id == "pi2"; }

VutSpec preset(std::string_view id) {
  VutSpec spec;
  spec.id = std::string(id);
  if (id == "pi1") {
    spec.params.s0 = 10.0;
  } else if (id == "pi2") {
    spec.params.s0 = 20.0;
  } else {
    throw ConfigError("unknown VUT id '" + std::string(id) + "' (expected pi1, pi2 or custom)");
  }
  return spec;
}

}  // namespace ayss::vut
