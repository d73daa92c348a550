#pragma once

#include <cmath>
#include <numbers>
#include <utility>

namespace lhvswap {

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// (sin, cos) of an angle in degrees, exact at multiples of 90 degrees.
inline std::pair<double, double> sincos_deg(double deg) {
  double reduced = std::fmod(deg, 360.0);
  if (reduced < 0.0) reduced += 360.0;
  if (reduced == 0.0) return {0.0, 1.0};
  if (reduced == 90.0) return {1.0, 0.0};
  if (reduced == 180.0) return {0.0, -1.0};
  if (reduced == 270.0) return {-1.0, 0.0};
  const double rad = deg_to_rad(reduced);
  return {std::sin(rad), std::cos(rad)};
}

}  // namespace lhvswap
