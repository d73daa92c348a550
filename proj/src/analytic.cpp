#include "lhvswap/analytic.hpp"

#include <stdexcept>
#include <string>

namespace lhvswap::analytic {

namespace {

void require_efficiency(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw std::domain_error("eta must lie in [0, 1], got " + std::to_string(eta));
  }
}

}  // namespace

double singlet_correlation(const UnitVec3& a, const UnitVec3& b) { return -dot(a, b); }

double partial_swap_singlet_prob(double eta) {
  require_efficiency(eta);
  return eta * eta / 4.0;
}

double partial_swap_full_coincidence_prob(double eta) {
  require_efficiency(eta);
  return eta * eta / 8.0;
}

double partial_swap_visibility(double eta) {
  require_efficiency(eta);
  return 1.0 - eta * eta / 4.0;
}

double partial_swap_correlation(const UnitVec3& a, const UnitVec3& b, double eta) {
  return partial_swap_visibility(eta) * singlet_correlation(a, b);
}

double quantum_outcome_correlation(BellOutcome outcome, const UnitVec3& a, const UnitVec3& b) {
  return -dot(a, branch_frame(outcome, b));
}

double chsh_value(const std::array<double, 4>& correlations) {
  return correlations[0] + correlations[1] + correlations[2] - correlations[3];
}

ChshSettings optimal_chsh_settings() {
  return ChshSettings{
      UnitVec3::from_angles_deg(0.0, 0.0),
      UnitVec3::from_angles_deg(90.0, 0.0),
      UnitVec3::from_angles_deg(45.0, 0.0),
      UnitVec3::from_angles_deg(-45.0, 0.0),
  };
}

}  // namespace lhvswap::analytic
