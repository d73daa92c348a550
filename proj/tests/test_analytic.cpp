#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lhvswap/analytic.hpp"

using namespace lhvswap;
using namespace lhvswap::analytic;

namespace {
const UnitVec3 kZ = UnitVec3::from_unit(0, 0, 1);
}

TEST(SingletCorrelation, Values) {
  const UnitVec3 a = UnitVec3::from_angles_deg(35, 20);
  EXPECT_NEAR(singlet_correlation(a, a), -1.0, 1e-15);
  EXPECT_NEAR(singlet_correlation(a, -a), 1.0, 1e-15);
  EXPECT_NEAR(singlet_correlation(kZ, UnitVec3::from_angles_deg(60, 0)), -0.5, 1e-15);
}

TEST(PartialSwapClosedForms, Values) {
  EXPECT_DOUBLE_EQ(partial_swap_singlet_prob(1.0), 0.25);
  EXPECT_DOUBLE_EQ(partial_swap_singlet_prob(0.0), 0.0);
  EXPECT_NEAR(partial_swap_singlet_prob(0.4), 0.04, 1e-15);
  EXPECT_DOUBLE_EQ(partial_swap_full_coincidence_prob(1.0), 0.125);
  EXPECT_DOUBLE_EQ(partial_swap_full_coincidence_prob(0.0), 0.0);
  EXPECT_DOUBLE_EQ(partial_swap_full_coincidence_prob(0.5), 0.03125);
  EXPECT_DOUBLE_EQ(partial_swap_correlation(kZ, kZ, 1.0), -0.75);
  EXPECT_NEAR(partial_swap_correlation(kZ, kZ, 0.4), -0.96, 1e-15);
  EXPECT_EQ(partial_swap_correlation(kZ, UnitVec3::from_unit(1, 0, 0), 0.7), 0.0);
  EXPECT_DOUBLE_EQ(partial_swap_visibility(1.0), thresholds::kSwapVisibilityFloor);
}

TEST(PartialSwapClosedForms, RejectBadEta) {
  EXPECT_THROW(partial_swap_singlet_prob(-0.1), std::domain_error);
  EXPECT_THROW(partial_swap_full_coincidence_prob(1.01), std::domain_error);
  EXPECT_THROW(partial_swap_correlation(kZ, kZ, NAN), std::domain_error);
}

TEST(QuantumOutcomeCorrelation, BranchSigns) {
  EXPECT_DOUBLE_EQ(quantum_outcome_correlation(BellOutcome::PsiMinus, kZ, kZ), -1.0);
  EXPECT_DOUBLE_EQ(quantum_outcome_correlation(BellOutcome::PhiMinus, kZ, kZ), 1.0);
  EXPECT_DOUBLE_EQ(quantum_outcome_correlation(BellOutcome::PsiPlus, kZ, kZ), -1.0);
}

TEST(Chsh, OptimalSettings) {
  const ChshSettings s = optimal_chsh_settings();
  const std::array<double, 4> e = {singlet_correlation(s.a, s.b), singlet_correlation(s.a, s.b_prime),
                                   singlet_correlation(s.a_prime, s.b),
                                   singlet_correlation(s.a_prime, s.b_prime)};
  EXPECT_NEAR(chsh_value(e), -2.0 * std::numbers::sqrt2, 1e-12);
  EXPECT_EQ(chsh_value({0, 0, 0, 0}), 0.0);
  const std::array<double, 4> scaled = {0.75 * e[0], 0.75 * e[1], 0.75 * e[2], 0.75 * e[3]};
  EXPECT_NEAR(std::abs(chsh_value(scaled)), 2.1213203, 1e-6);
}

TEST(Thresholds, Constants) {
  EXPECT_EQ(thresholds::kMeanDetectionSingletModel, 0.75);
  EXPECT_NEAR(thresholds::kChshVisibility, 0.7071, 1e-4);
  EXPECT_EQ(thresholds::kChTwoSettingEfficiency, 0.828);
}
