#include "lhvswap/sphere.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lhvswap/angles.hpp"

namespace lhvswap {

UnitVec3 UnitVec3::normalized(double x, double y, double z) {
  const double norm = std::sqrt(x * x + y * y + z * z);
  if (!std::isfinite(norm) || norm == 0.0) {
    throw std::invalid_argument("UnitVec3: cannot normalize a zero or non-finite vector");
  }
  return UnitVec3(x / norm, y / norm, z / norm);
}

UnitVec3 UnitVec3::from_angles_deg(double theta_deg, double phi_deg) {
  const auto [sin_t, cos_t] = sincos_deg(theta_deg);
  const auto [sin_p, cos_p] = sincos_deg(phi_deg);
  return UnitVec3(sin_t * cos_p, sin_t * sin_p, cos_t);
}

double UnitVec3::theta_deg() const {
  return std::acos(std::clamp(z_, -1.0, 1.0)) * 180.0 / std::numbers::pi;
}

double UnitVec3::phi_deg() const {
  if (x_ == 0.0 && y_ == 0.0) return 0.0;
  double phi = std::atan2(y_, x_) * 180.0 / std::numbers::pi;
  if (phi < 0.0) phi += 360.0;
  return phi;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_index)
    : seed_(seed), stream_index_(stream_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_index),
                    static_cast<std::uint32_t>(stream_index >> 32), 0x6c687673u};
  engine_.seed(seq);
}

UnitVec3 sample_uniform(RandomStream& stream) {
  const double z = 2.0 * stream.uniform() - 1.0;
  const double phi = 2.0 * std::numbers::pi * stream.uniform();
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return UnitVec3::from_unit(r * std::cos(phi), r * std::sin(phi), z);
}

}  // namespace lhvswap
