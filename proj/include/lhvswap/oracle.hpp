#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lhvswap/models.hpp"
#include "lhvswap/sphere.hpp"

namespace lhvswap::oracle {

/// Product midpoint grid on the sphere: n_z equal-measure bands in z times
/// n_phi equal azimuth steps, every node carrying weight 1/(n_z n_phi).
class SphereGrid {
 public:
  SphereGrid(std::size_t n_z, std::size_t n_phi);

  /// Same grid rigidly rotated so that its pole (the z axis of the bands)
  /// points along `pole`. Great circles orthogonal to `pole` then run along
  /// band edges.
  SphereGrid oriented(const UnitVec3& pole) const;

  std::size_t n_z() const { return n_z_; }
  std::size_t n_phi() const { return n_phi_; }
  std::size_t size() const { return xs_.size(); }
  double weight() const { return 1.0 / static_cast<double>(size()); }

  UnitVec3 node(std::size_t i) const { return UnitVec3::from_unit(xs_[i], ys_[i], zs_[i]); }
  std::span<const double> xs() const { return xs_; }
  std::span<const double> ys() const { return ys_; }
  std::span<const double> zs() const { return zs_; }

  /// True when the node set is invariant under the coordinate reflections
  /// (n_z even, n_phi divisible by 4).
  bool octant_symmetric() const { return n_z_ % 2 == 0 && n_phi_ % 4 == 0; }

 private:
  std::size_t n_z_;
  std::size_t n_phi_;
  std::vector<double> xs_, ys_, zs_;
};

/// Grid defaults: rotation-invariant quantities run at 400 x 400 restricted
/// to one octant of the outer sphere, general settings at 200 x 200.
inline constexpr std::size_t kSymmetricGridSize = 400;
inline constexpr std::size_t kGeneralGridSize = 200;

class EmptyBranchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PartialSwapValues {
  double p_singlet = 0.0;
  double p_full = 0.0;
  /// Absent when the conditioning region has no grid mass (eta = 0).
  std::optional<double> correlation;
};

/// Product quadrature of the partial-swap singlet probability, the
/// full-coincidence probability and the conditional correlation.
PartialSwapValues oracle_partial_swap(double eta, const UnitVec3& a, const UnitVec3& b,
                                      const SphereGrid& grid);

/// Singlet probability only, using the octant reduction when the grid allows.
double oracle_partial_swap_singlet_prob(double eta, const SphereGrid& grid);

/// Grid mass of {min_k lambda1 . R_k lambda4 < -limit}, octant-reduced.
double oracle_bell_result_prob(double limit, const SphereGrid& grid);
std::vector<double> oracle_bell_result_curve(std::span<const double> limits,
                                             const SphereGrid& grid);

/// Limit at which the result probability equals `target`, by bisection on
/// the oracle curve.
double oracle_limit_for_result_prob(double target, const SphereGrid& grid,
                                    double tolerance = 1e-6);

/// Weighted grid mass of the four Alice x Bob sign combinations in one
/// (limit, outcome, alice, bob) cell, plus the branch mass itself.
struct OracleCell {
  std::array<double, 4> joint_mass{};  ///< pp, pm, mp, mm
  double branch_mass = 0.0;

  double coincidence_mass() const {
    return joint_mass[0] + joint_mass[1] + joint_mass[2] + joint_mass[3];
  }
  /// Throws EmptyBranchError when the coincidence mass is zero.
  double correlation() const;
  std::array<double, 4> joint_probabilities() const;
};

/// Conditional statistics of the complete-swap model for every combination
/// of the requested limits, Alice settings and Bob settings.
class CompleteSwapTable {
 public:
  CompleteSwapTable(std::vector<double> limits, std::size_t n_alice, std::size_t n_bob);

  std::span<const double> limits() const { return limits_; }
  std::size_t n_alice() const { return n_alice_; }
  std::size_t n_bob() const { return n_bob_; }

  const OracleCell& cell(std::size_t limit_index, BellOutcome outcome, std::size_t alice,
                         std::size_t bob) const;
  OracleCell& cell(std::size_t limit_index, BellOutcome outcome, std::size_t alice,
                   std::size_t bob);
  double result_prob(std::size_t limit_index) const { return result_mass_[limit_index]; }
  double& result_prob(std::size_t limit_index) { return result_mass_[limit_index]; }
  double correlation(std::size_t limit_index, BellOutcome outcome, std::size_t alice,
                     std::size_t bob) const {
    return cell(limit_index, outcome, alice, bob).correlation();
  }

 private:
  std::size_t offset(std::size_t limit_index, BellOutcome outcome, std::size_t alice,
                     std::size_t bob) const;

  std::vector<double> limits_;
  std::size_t n_alice_;
  std::size_t n_bob_;
  std::vector<OracleCell> cells_;
  std::vector<double> result_mass_;
};

/// Full product quadrature over (lambda1, lambda4). Limits need not be sorted.
CompleteSwapTable oracle_complete_swap(std::span<const double> limits,
                                       std::span<const UnitVec3> alices,
                                       std::span<const UnitVec3> bobs, const SphereGrid& grid);

/// Same, with separate node sets for lambda1 (`alice_grid`) and lambda4
/// (`bob_grid`). Orienting the lambda4 grid so Bob's sign boundaries fall on
/// cell edges removes their discretization error.
CompleteSwapTable oracle_complete_swap(std::span<const double> limits,
                                       std::span<const UnitVec3> alices,
                                       std::span<const UnitVec3> bobs,
                                       const SphereGrid& alice_grid, const SphereGrid& bob_grid);

/// Conditional E(a, b) given the Bell branch. Throws std::invalid_argument for
/// NoResult and EmptyBranchError when the branch carries no mass.
double oracle_complete_swap_correlation(double limit, BellOutcome outcome, const UnitVec3& a,
                                        const UnitVec3& b, const SphereGrid& grid);

/// Fidelity (1 + 3V)/4 with V measured along x, y and z in each branch frame
/// and pooled over the four branches, one value per limit.
std::vector<double> oracle_fidelity_curve(std::span<const double> limits, const SphereGrid& grid);

/// Plain-text reference file: one `key<TAB>value<TAB>error_bound` record per line.
struct FixtureEntry {
  double value = 0.0;
  double error_bound = 0.0;
};
using Fixture = std::map<std::string, FixtureEntry>;

void write_fixture(std::ostream& out, const Fixture& fixture);
/// Throws std::runtime_error on a malformed line. Lines starting with '#' are skipped.
Fixture read_fixture(std::istream& in);
Fixture load_fixture(const std::string& path);

}  // namespace lhvswap::oracle
