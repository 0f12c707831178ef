#include <doctest.h>

#include <limits>
#include <random>

#include "ayss/error.hpp"
#include "ayss/vut.hpp"
#include "oracles.hpp"

using namespace ayss;
using namespace ayss::vut;

namespace {
const sim::Interval kBounds{-6.0, 6.0};
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

TEST_SUITE("vut") {
  TEST_CASE("free flow") {
    const IDMParams p = preset("pi1").params;
    CHECK(idm_accel(30, 30, kInf, p, kBounds).accel == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(idm_accel(30, 30, 1e9, p, kBounds).accel == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(idm_accel(0, 0, kInf, p, kBounds).accel == 3.0);
    CHECK(vut_act({30, std::nullopt, std::nullopt}, p, kBounds) == doctest::Approx(0.0));
  }

  TEST_CASE("contact returns full braking and a flag") {
    const IDMParams p = preset("pi1").params;
    const IdmResult r = idm_accel(10, 10, 0.0, p, kBounds);
    CHECK(r.accel == -6.0);
    CHECK(r.contact);
    CHECK(idm_accel(10, 10, -1.0, p, kBounds).contact);
    CHECK_FALSE(idm_accel(10, 10, 1.0, p, kBounds).contact);
  }

  TEST_CASE("equilibrium gap matches a bisection oracle") {
    const IDMParams p = preset("pi1").params;
    const double gap = oracle::bisect(
        [](double g) { return oracle::idm(20, 20, g, 10.0, 30, 1.5, 3, 5, 4, -1e9, 1e9); }, 1.0, 500.0);
    CHECK(std::abs(idm_accel(20, 20, gap, p, kBounds).accel) < 1e-6);
    // Closed form for equal speeds: s*/sqrt(1 - (v/v0)^4).
    const double closed = (10.0 + 20 * 1.5) / std::sqrt(1.0 - std::pow(20.0 / 30.0, 4));
    CHECK(gap == doctest::Approx(closed).epsilon(1e-9));
  }

  TEST_CASE("lead at s0 and equal speed brakes hard") {
    const IDMParams p = preset("pi1").params;
    CHECK(vut_act({20, 20.0, 10.0}, p, kBounds) < -3.0);
  }

  TEST_CASE("pi2 brakes strictly harder than pi1 at (20, 15, 25)") {
    // Both raw values lie below -6, so the ordering is visible only unclamped.
    const sim::Interval wide{-1e9, 1e9};
    const double a1 = vut_act({20, 15.0, 25.0}, preset("pi1").params, wide);
    const double a2 = vut_act({20, 15.0, 25.0}, preset("pi2").params, wide);
    CHECK(a1 == doctest::Approx(oracle::idm(20, 15, 25, 10.0, 30, 1.5, 3, 5, 4, -1e9, 1e9)));
    CHECK(a2 == doctest::Approx(oracle::idm(20, 15, 25, 20.0, 30, 1.5, 3, 5, 4, -1e9, 1e9)));
    CHECK(a2 < a1);
    CHECK(vut_act({20, 15.0, 25.0}, preset("pi1").params, kBounds) == -6.0);
    CHECK(vut_act({20, 15.0, 25.0}, preset("pi2").params, kBounds) == -6.0);
  }

  TEST_CASE("monotone in gap, ordered by s0, clamped") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uv(0, 40), ug(0.01, 120);
    const IDMParams p1 = preset("pi1").params;
    const IDMParams p2 = preset("pi2").params;
    for (int i = 0; i < 5000; ++i) {
      const double v = uv(rng), vl = uv(rng), g = ug(rng), dg = ug(rng) * 0.1;
      const double a = idm_accel(v, vl, g, p1, kBounds).accel;
      CHECK(idm_accel(v, vl, g + dg, p1, kBounds).accel >= a);
      CHECK(idm_accel(v, vl, g, p2, kBounds).accel <= a);
      CHECK(a >= -6.0);
      CHECK(a <= 6.0);
      CHECK(a == doctest::Approx(oracle::idm(v, vl, g, 10.0)).epsilon(1e-12));
    }
  }

  TEST_CASE("presets and validation") {
    CHECK(preset("pi1").params.s0 == 10.0);
    CHECK(preset("pi2").params.s0 == 20.0);
    CHECK(preset("pi2").params.T == preset("pi1").params.T);
    CHECK(is_preset("pi1"));
    CHECK_FALSE(is_preset("pi3"));
    CHECK_THROWS_AS(preset("pi3"), ConfigError);
    IDMParams bad;
    bad.T = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(make_idm_policy(bad, kBounds), ConfigError);
  }
}
