#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "lhvswap/analytic.hpp"
#include "lhvswap/estimators.hpp"
#include "lhvswap/models.hpp"

using namespace lhvswap;

namespace {

const UnitVec3 kX = UnitVec3::from_unit(1, 0, 0);
const UnitVec3 kZ = UnitVec3::from_unit(0, 0, 1);

AggregateCounts run_many(const ModelParams& model, const UnitVec3& a, const UnitVec3& b, int n,
                         std::uint64_t seed) {
  RandomStream stream(seed, 0);
  AggregateCounts agg(1);
  for (int i = 0; i < n; ++i) agg.add(run_trial(model, a, b, stream));
  return agg;
}

}  // namespace

TEST(BellOutcome, NamesRoundTrip) {
  for (const BellOutcome k : kBellStates) EXPECT_EQ(parse_bell_outcome(to_string(k)), k);
  EXPECT_EQ(parse_bell_outcome("no_result"), BellOutcome::NoResult);
  EXPECT_FALSE(parse_bell_outcome("psi").has_value());
}

TEST(BranchFrame, MapsOutcomesToRotations) {
  const UnitVec3 v = UnitVec3::normalized(0.6, 0.48, 0.64);
  EXPECT_EQ(branch_frame(BellOutcome::PsiMinus, v), v);
  EXPECT_EQ(branch_frame(BellOutcome::PhiMinus, v), rotate_pi(Axis::X, v));
  EXPECT_EQ(branch_frame(BellOutcome::PhiPlus, v), rotate_pi(Axis::Y, v));
  EXPECT_EQ(branch_frame(BellOutcome::PsiPlus, v), rotate_pi(Axis::Z, v));
  EXPECT_FALSE(branch_axis(BellOutcome::PsiMinus).has_value());
  EXPECT_THROW(branch_axis(BellOutcome::NoResult), std::invalid_argument);
}

TEST(AliceResponse, AlignedAndOrthogonal) {
  EXPECT_EQ(alice_response(kZ, kZ, 0.999999), DetectorOutcome::Plus);
  EXPECT_EQ(alice_response(kZ, -kZ, 0.0), DetectorOutcome::Minus);
  EXPECT_EQ(alice_response(kZ, kX, 0.0), DetectorOutcome::NoDetect);
  // Detection when u < |a.lambda|.
  const UnitVec3 tilted = UnitVec3::from_angles_deg(60, 0);
  EXPECT_EQ(alice_response(kZ, tilted, 0.49), DetectorOutcome::Plus);
  EXPECT_EQ(alice_response(kZ, tilted, 0.51), DetectorOutcome::NoDetect);
}

TEST(BobResponse, SignWithZeroAsPlus) {
  EXPECT_EQ(bob_response(kZ, -kZ), DetectorOutcome::Minus);
  EXPECT_EQ(bob_response(kZ, kZ), DetectorOutcome::Plus);
  EXPECT_EQ(bob_response(kZ, kX), DetectorOutcome::Plus);
}

TEST(Params, RejectOutOfRange) {
  EXPECT_THROW(PartialSwapParams(-0.1), std::invalid_argument);
  EXPECT_THROW(PartialSwapParams(1.1), std::invalid_argument);
  EXPECT_THROW(CompleteSwapParams(1.5), std::invalid_argument);
  EXPECT_THROW(CompleteSwapParams(NAN), std::invalid_argument);
  EXPECT_DOUBLE_EQ(PartialSwapParams(1.0).overlap_threshold(), 0.5);
}

TEST(SingletModel, ParallelAnalyzersAnticorrelate) {
  const AggregateCounts agg = run_many(SingletParams{}, kZ, kZ, 100'000, 1);
  const CellCounts& c = agg.cell(0, BellOutcome::PsiMinus);
  EXPECT_EQ(c.n_pp, 0u);
  EXPECT_EQ(c.n_mm, 0u);
  EXPECT_EQ(agg.n_bell_result(), agg.n_trials());
}

TEST(SingletModel, ConditionalCorrelationMatchesQuantum) {
  const UnitVec3 b = UnitVec3::from_angles_deg(60, 0);
  const AggregateCounts agg = run_many(SingletParams{}, kZ, b, 1'000'000, 2);
  const CorrelationEstimate e = correlation(agg, 0, BellOutcome::PsiMinus);
  EXPECT_NEAR(e.value, -0.5, 4 * e.std_error);
  const Estimate alice = binomial_fraction(agg.outcome_coincidences(BellOutcome::PsiMinus),
                                           agg.outcome_events(BellOutcome::PsiMinus));
  EXPECT_NEAR(alice.value, 0.5, 4 * alice.std_error);
}

TEST(PartialSwap, ThresholdCondition) {
  const PartialSwapParams p(1.0);
  EXPECT_TRUE(partial_swap_accepts(kZ, kZ, p));
  EXPECT_FALSE(partial_swap_accepts(kZ, -kZ, p));
  EXPECT_FALSE(partial_swap_accepts(kZ, kX, p));
  EXPECT_FALSE(partial_swap_accepts(kZ, UnitVec3::from_angles_deg(1e-3, 0), PartialSwapParams(0.0)));
}

TEST(PartialSwap, EtaZeroNeverReportsSinglet) {
  const AggregateCounts agg = run_many(PartialSwapParams(0.0), kZ, kZ, 100'000, 3);
  EXPECT_EQ(agg.n_bell_result(), 0u);
}

TEST(PartialSwap, SingletAndFullCoincidenceFractions) {
  const AggregateCounts agg = run_many(PartialSwapParams(1.0), kZ, kZ, 2'000'000, 4);
  const Estimate p = binomial_fraction(agg.outcome_events(BellOutcome::PsiMinus), agg.n_trials());
  EXPECT_NEAR(p.value, 0.25, 4 * p.std_error);
  const Estimate full =
      binomial_fraction(agg.outcome_coincidences(BellOutcome::PsiMinus), agg.n_trials());
  EXPECT_NEAR(full.value, 0.125, 4 * full.std_error);
  const CorrelationEstimate e = correlation(agg, 0, BellOutcome::PsiMinus);
  EXPECT_NEAR(e.value, -0.75, 4 * e.std_error);
}

TEST(ScoreBell, ZeroSumIdentity) {
  RandomStream stream(5, 0);
  double worst = 0.0;
  for (int i = 0; i < 100'000; ++i) {
    const BellScore s = score_bell(sample_uniform(stream), sample_uniform(stream));
    worst = std::max(worst, std::abs(s.products[0] + s.products[1] + s.products[2] + s.products[3]));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(BellArgmin, PicksTheRotatedBranch) {
  const UnitVec3 l1 = UnitVec3::normalized(0.3, -0.5, 0.8);
  EXPECT_EQ(bell_argmin(l1, -l1, 0.0), BellOutcome::PsiMinus);
  EXPECT_EQ(bell_argmin(l1, -rotate_pi(Axis::X, l1), 0.0), BellOutcome::PhiMinus);
  EXPECT_EQ(bell_argmin(l1, -rotate_pi(Axis::Y, l1), 0.0), BellOutcome::PhiPlus);
  EXPECT_EQ(bell_argmin(l1, -rotate_pi(Axis::Z, l1), 0.0), BellOutcome::PsiPlus);
}

TEST(BellArgmin, LimitOneNeverAccepts) {
  const UnitVec3 l1 = UnitVec3::normalized(0.3, -0.5, 0.8);
  EXPECT_EQ(bell_argmin(l1, -l1, 1.0), BellOutcome::NoResult);
  const AggregateCounts agg = run_many(CompleteSwapParams(1.0), kZ, kZ, 100'000, 6);
  EXPECT_EQ(agg.n_bell_result(), 0u);
}

TEST(CompleteSwap, LimitZeroAlwaysAccepts) {
  const AggregateCounts agg = run_many(CompleteSwapParams(0.0), kZ, kZ, 200'000, 7);
  EXPECT_EQ(agg.n_bell_result(), agg.n_trials());
}

TEST(CompleteSwap, NoResultTrialsCarryNoDetections) {
  RandomStream stream(8, 0);
  for (int i = 0; i < 1000; ++i) {
    const TrialRecord r = run_complete_swap_trial(kZ, kZ, CompleteSwapParams(0.9), stream, 3);
    EXPECT_EQ(r.setting_id, 3u);
    if (r.bell == BellOutcome::NoResult) {
      EXPECT_EQ(r.alice, DetectorOutcome::NoDetect);
      EXPECT_EQ(r.bob, DetectorOutcome::NoDetect);
    } else {
      EXPECT_NE(r.bob, DetectorOutcome::NoDetect);
    }
  }
}
