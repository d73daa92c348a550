#pragma once

#include <array>
#include <numbers>

#include "lhvswap/models.hpp"
#include "lhvswap/sphere.hpp"

namespace lhvswap::analytic {

/// Named thresholds used as reference points by the verification table.
namespace thresholds {
/// Detection efficiency averaged over both sides of the singlet model
/// (Alice 1/2, Bob 1).
inline constexpr double kMeanDetectionSingletModel = 0.75;
/// Minimal efficiency for a two-setting CH test on the singlet. Stored for
/// reference only; nothing derives from it.
inline constexpr double kChTwoSettingEfficiency = 0.828;
/// Visibility above which the CHSH bound 2 is violated.
inline constexpr double kChshVisibility = 1.0 / std::numbers::sqrt2;
/// Visibility the partial-swap model reaches at eta = 1.
inline constexpr double kSwapVisibilityFloor = 0.75;
}  // namespace thresholds

/// -a.b
double singlet_correlation(const UnitVec3& a, const UnitVec3& b);

/// eta^2/4. Throws std::domain_error outside [0, 1].
double partial_swap_singlet_prob(double eta);

/// eta^2/8: singlet reported and Alice detected.
double partial_swap_full_coincidence_prob(double eta);

/// -(1 - eta^2/4) a.b
double partial_swap_correlation(const UnitVec3& a, const UnitVec3& b, double eta);

/// 1 - eta^2/4
double partial_swap_visibility(double eta);

/// Ideal quantum correlation of the swapped pair given Bell result k:
/// -a.(R_k b). Throws std::invalid_argument for NoResult.
double quantum_outcome_correlation(BellOutcome outcome, const UnitVec3& a, const UnitVec3& b);

/// E(a,b) + E(a,b') + E(a',b) - E(a',b'), inputs in that order.
double chsh_value(const std::array<double, 4>& correlations);

/// Settings (a, a', b, b') at which E = -a.b reaches |S| = 2 sqrt(2):
/// a, a' along z and x; b, b' on the diagonals of the xz plane.
struct ChshSettings {
  UnitVec3 a, a_prime, b, b_prime;
};
ChshSettings optimal_chsh_settings();

}  // namespace lhvswap::analytic
