#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "lhvswap/analytic.hpp"
#include "lhvswap/angles.hpp"
#include "lhvswap/estimators.hpp"

using namespace lhvswap;

namespace {

CellCounts cell(std::uint64_t pp, std::uint64_t pm, std::uint64_t mp, std::uint64_t mm) {
  CellCounts c;
  c.n_pp = pp;
  c.n_pm = pm;
  c.n_mp = mp;
  c.n_mm = mm;
  return c;
}

const UnitVec3 kZ = UnitVec3::from_unit(0, 0, 1);

}  // namespace

TEST(AggregateCounts, AddsTrials) {
  AggregateCounts agg(2);
  agg.add({BellOutcome::PsiMinus, DetectorOutcome::Plus, DetectorOutcome::Minus, 0});
  EXPECT_EQ(agg.cell(0, BellOutcome::PsiMinus).n_pm, 1u);
  EXPECT_EQ(agg.n_bell_result(), 1u);

  AggregateCounts none(1);
  none.add({BellOutcome::NoResult, DetectorOutcome::NoDetect, DetectorOutcome::NoDetect, 0});
  EXPECT_EQ(none.n_trials(), 1u);
  EXPECT_EQ(none.n_bell_result(), 0u);

  agg.add({BellOutcome::PhiPlus, DetectorOutcome::NoDetect, DetectorOutcome::Plus, 1});
  EXPECT_EQ(agg.cell(1, BellOutcome::PhiPlus).n_alice_nodetect, 1u);
  EXPECT_EQ(agg.setting_trials(1), 1u);
}

TEST(AggregateCounts, MergeIsAdditive) {
  AggregateCounts a(1), b(1);
  a.add_cell(0, BellOutcome::PsiMinus, cell(1, 2, 3, 4));
  a.add_no_result(0, 5);
  b.add_cell(0, BellOutcome::PsiMinus, cell(10, 0, 0, 0));
  const AggregateCounts m = merge(a, b);
  EXPECT_EQ(m.n_trials(), a.n_trials() + b.n_trials());
  EXPECT_EQ(m.cell(0, BellOutcome::PsiMinus).n_pp, 11u);
  EXPECT_THROW(a += AggregateCounts(2), std::invalid_argument);
}

TEST(Correlation, KnownCounts) {
  const CorrelationEstimate flat = correlation(cell(25, 25, 25, 25));
  EXPECT_NEAR(flat.value, 0.0, 1e-15);
  EXPECT_NEAR(flat.std_error, 0.1, 1e-15);
  const CorrelationEstimate perfect = correlation(cell(50, 0, 0, 50));
  EXPECT_EQ(perfect.value, 1.0);
  EXPECT_EQ(perfect.std_error, 0.0);
  EXPECT_THROW(correlation(CellCounts{}), EmptyCellError);
  EXPECT_THROW(binomial_fraction(0, 0), EmptyCellError);
}

TEST(JointProbabilities, KnownCounts) {
  const auto p = joint_probabilities(cell(25, 25, 25, 25));
  for (const double v : p) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Fidelity, FromVisibility) {
  EXPECT_EQ(fidelity_from_visibility(1.0), 1.0);
  EXPECT_EQ(fidelity_from_visibility(0.0), 0.25);
}

TEST(FrameVisibility, SignFlipsInRotatedFrames) {
  // In the PhiMinus frame, z analyzers are antiparallel: E(z,z) = +V.
  AggregateCounts agg(1);
  agg.add_cell(0, BellOutcome::PhiMinus, cell(45, 5, 5, 45));
  const std::vector<FrameSetting> s = {{0, kZ, kZ}};
  EXPECT_NEAR(frame_visibility(agg, BellOutcome::PhiMinus, s).value, 0.8, 1e-15);
  const std::vector<FrameSetting> skew = {{0, kZ, UnitVec3::from_unit(1, 0, 0)}};
  EXPECT_THROW(frame_visibility(agg, BellOutcome::PhiMinus, skew), std::invalid_argument);
}

TEST(PooledFidelity, CombinesBranches) {
  AggregateCounts agg(1);
  agg.add_cell(0, BellOutcome::PsiMinus, cell(0, 50, 50, 0));
  agg.add_cell(0, BellOutcome::PhiMinus, cell(50, 0, 0, 50));
  const std::vector<FrameSetting> s = {{0, kZ, kZ}};
  EXPECT_DOUBLE_EQ(pooled_fidelity(agg, s).value, 1.0);
  EXPECT_THROW(pooled_fidelity(AggregateCounts(1), s), EmptyCellError);
}

TEST(Chsh, FromCounts) {
  AggregateCounts agg(4);
  agg.add_cell(0, BellOutcome::PsiMinus, cell(0, 50, 50, 0));
  agg.add_cell(1, BellOutcome::PsiMinus, cell(0, 50, 50, 0));
  agg.add_cell(2, BellOutcome::PsiMinus, cell(0, 50, 50, 0));
  agg.add_cell(3, BellOutcome::PsiMinus, cell(50, 0, 0, 50));
  EXPECT_EQ(chsh_from_counts(agg, {0, 1, 2, 3}, BellOutcome::PsiMinus).value, -4.0);
  AggregateCounts flat(4);
  for (std::size_t i = 0; i < 4; ++i) flat.add_cell(i, BellOutcome::PsiMinus, cell(25, 25, 25, 25));
  const Estimate s = chsh_from_counts(flat, {0, 1, 2, 3}, BellOutcome::PsiMinus);
  EXPECT_NEAR(s.value, 0.0, 4 * s.std_error);
}

TEST(FitSinusoid, PureCosine) {
  std::vector<AngleSample> samples;
  for (int k = 0; k < 8; ++k) {
    const double t = deg_to_rad(45.0 * k);
    samples.push_back({t, std::cos(t), 0.0});
  }
  const SinusoidFit f = fit_sinusoid(samples);
  EXPECT_NEAR(f.c_offset, 0.0, 1e-10);
  EXPECT_NEAR(f.a_cos, 1.0, 1e-10);
  EXPECT_NEAR(f.b_sin, 0.0, 1e-10);
  EXPECT_NEAR(f.rms_residual, 0.0, 1e-10);
  EXPECT_FALSE(f.weighted);
}

TEST(FitSinusoid, Constant) {
  std::vector<AngleSample> samples;
  for (int k = 0; k < 8; ++k) samples.push_back({deg_to_rad(45.0 * k), 0.3, 0.01});
  const SinusoidFit f = fit_sinusoid(samples);
  EXPECT_NEAR(f.c_offset, 0.3, 1e-12);
  EXPECT_NEAR(f.amplitude, 0.0, 1e-12);
  EXPECT_TRUE(f.weighted);
  EXPECT_NEAR(f.offset_stderr, 0.01 / std::sqrt(8.0), 1e-12);
}

TEST(FitSinusoid, RecoversPhaseAndErrors) {
  std::vector<AngleSample> samples;
  for (int k = 0; k < 36; ++k) {
    const double t = deg_to_rad(10.0 * k);
    samples.push_back({t, 0.1 + 0.6 * std::cos(t - 0.5), 0.02});
  }
  const SinusoidFit f = fit_sinusoid(samples);
  EXPECT_NEAR(f.amplitude, 0.6, 1e-12);
  EXPECT_NEAR(f.phase, 0.5, 1e-12);
  EXPECT_NEAR(f.c_offset, 0.1, 1e-12);
  // Balanced design: var(C) = sigma^2/N, var(A) = 2 sigma^2/N.
  EXPECT_NEAR(f.offset_stderr, 0.02 / 6.0, 1e-12);
  EXPECT_NEAR(f.amplitude_stderr, 0.02 * std::sqrt(2.0) / 6.0, 1e-12);
  EXPECT_EQ(f.dof, 33u);
}

TEST(FitSinusoid, RankDeficient) {
  const std::vector<AngleSample> two = {{0.0, 1.0, 0.1}, {1.0, 0.5, 0.1}, {2 * std::numbers::pi, 1.0, 0.1}};
  EXPECT_THROW(fit_sinusoid(two), RankDeficientError);
}
