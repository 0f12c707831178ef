#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library code it is compared against.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace oracle {

struct Box {
  double x, y, heading, length, width;
};

inline bool contains(const Box& b, double px, double py, double grow = 0.0) {
  const double dx = px - b.x;
  const double dy = py - b.y;
  const double c = std::cos(b.heading);
  const double s = std::sin(b.heading);
  const double lx = dx * c + dy * s;
  const double ly = -dx * s + dy * c;
  return std::abs(lx) <= 0.5 * b.length + grow && std::abs(ly) <= 0.5 * b.width + grow;
}

/// Rasterizes a on a grid of the given resolution in its own frame
/// (edges and corners included) and reports whether any sample lies in b.
inline bool raster_overlap(const Box& a, const Box& b, double resolution = 0.01,
                           double grow_b = 0.0) {
  const int nx = static_cast<int>(std::ceil(a.length / resolution));
  const int ny = static_cast<int>(std::ceil(a.width / resolution));
  const double c = std::cos(a.heading);
  const double s = std::sin(a.heading);
  for (int i = 0; i <= nx; ++i) {
    const double lx = -0.5 * a.length + a.length * i / nx;
    for (int j = 0; j <= ny; ++j) {
      const double ly = -0.5 * a.width + a.width * j / ny;
      if (contains(b, a.x + lx * c - ly * s, a.y + lx * s + ly * c, grow_b)) return true;
    }
  }
  return false;
}

/// Plain IDM formula with clamp; gap <= 0 is full braking.
inline double idm(double v, double v_lead, double gap, double s0, double v0 = 30.0, double T = 1.5,
                  double a = 3.0, double b = 5.0, double delta = 4.0, double lo = -6.0,
                  double hi = 6.0) {
  if (gap <= 0.0) return lo;
  const double s_star = s0 + std::max(0.0, v * T + v * (v - v_lead) / (2.0 * std::sqrt(a * b)));
  const double acc = a * (1.0 - std::pow(v / v0, delta) - (s_star / gap) * (s_star / gap));
  return std::clamp(acc, lo, hi);
}

/// Root of a monotone function on [lo, hi] by bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     double tol = 1e-12) {
  double flo = f(lo);
  for (int it = 0; it < 500 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
