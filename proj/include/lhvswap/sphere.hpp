#pragma once

#include <cstdint>
#include <random>

namespace lhvswap {

/// A point on the unit (Poincare) sphere. Used both for hidden variables and
/// for analyzer directions.
class UnitVec3 {
 public:
  /// Defaults to the north pole.
  constexpr UnitVec3() = default;

  /// Normalizes (x, y, z). Throws std::invalid_argument for a zero or
  /// non-finite vector.
  static UnitVec3 normalized(double x, double y, double z);

  /// Spherical angles in degrees: theta is the polar angle from +z, phi the
  /// azimuth from +x toward +y.
  static UnitVec3 from_angles_deg(double theta_deg, double phi_deg);

  /// Wraps components the caller guarantees to be unit length.
  static constexpr UnitVec3 from_unit(double x, double y, double z) {
    return UnitVec3(x, y, z);
  }

  constexpr double x() const { return x_; }
  constexpr double y() const { return y_; }
  constexpr double z() const { return z_; }

  constexpr UnitVec3 operator-() const { return UnitVec3(-x_, -y_, -z_); }
  constexpr bool operator==(const UnitVec3&) const = default;

  /// Polar/azimuthal angles in degrees, the inverse of from_angles_deg.
  double theta_deg() const;
  double phi_deg() const;

 private:
  constexpr UnitVec3(double x, double y, double z) : x_(x), y_(y), z_(z) {}

  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 1.0;
};

constexpr double dot(const UnitVec3& u, const UnitVec3& v) {
  return u.x() * v.x() + u.y() * v.y() + u.z() * v.z();
}

enum class Axis : std::uint8_t { X, Y, Z };

/// pi-rotation about a coordinate axis: the diagonal involution that keeps
/// the axis component and flips the other two.
constexpr UnitVec3 rotate_pi(Axis axis, const UnitVec3& v) {
  switch (axis) {
    case Axis::X: return UnitVec3::from_unit(v.x(), -v.y(), -v.z());
    case Axis::Y: return UnitVec3::from_unit(-v.x(), v.y(), -v.z());
    case Axis::Z: return UnitVec3::from_unit(-v.x(), -v.y(), v.z());
  }
  return v;
}

/// Deterministic random substream. Streams sharing a seed but differing in
/// stream_index are seeded independently through std::seed_seq, so every
/// (seed, stream_index) pair reproduces the same sequence.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_index);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_index() const { return stream_index_; }

  /// Uniform on [0, 1).
  double uniform() { return unit_(engine_); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

/// Uniform point on the sphere by the Archimedes construction: z uniform on
/// [-1, 1], azimuth uniform on [0, 2pi).
UnitVec3 sample_uniform(RandomStream& stream);

}  // namespace lhvswap
