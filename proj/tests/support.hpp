#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "stereonormal/field.hpp"
#include "stereonormal/stereo_geometry.hpp"
#include "stereonormal/vec3.hpp"

namespace testing {

using stereonormal::Vec3;

// Unsigned angle in degrees from the chord between the unit vectors
// (independent of the library's atan2 form, accurate for tiny angles).
inline double angle_deg(const Vec3& a, const Vec3& b) {
  const Vec3 ua = a / stereonormal::norm(a);
  Vec3 ub = b / stereonormal::norm(b);
  if (stereonormal::dot(ua, ub) < 0.0) ub = -1.0 * ub;
  const double chord = stereonormal::norm(ua - ub);
  return 2.0 * std::asin(std::min(1.0, chord / 2.0)) * 180.0 / M_PI;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  for (;;) {
    const Vec3 v{g(rng), g(rng), g(rng)};
    const double n = stereonormal::norm(v);
    if (n > 1e-6) return v / n;
  }
}

// Uniform random disparities in [lo, hi] with about `hole_fraction` masked.
inline stereonormal::ScalarField random_field(int w, int h, std::mt19937_64& rng, double lo = 5.0,
                                              double hi = 40.0, double hole_fraction = 0.0) {
  stereonormal::ScalarField f(w, h);
  std::uniform_real_distribution<double> value(lo, hi);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      const double d = value(rng);
      if (coin(rng) >= hole_fraction) f.set(u, v, d);
    }
  return f;
}

inline bool close_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace testing
