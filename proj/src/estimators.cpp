#include "lhvswap/estimators.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace lhvswap {

CellCounts& CellCounts::operator+=(const CellCounts& other) {
  n_pp += other.n_pp;
  n_pm += other.n_pm;
  n_mp += other.n_mp;
  n_mm += other.n_mm;
  n_alice_nodetect += other.n_alice_nodetect;
  return *this;
}

AggregateCounts::AggregateCounts(std::size_t n_settings)
    : cells_(n_settings * kBellStateCount), setting_trials_(n_settings, 0) {
  if (n_settings == 0) throw std::invalid_argument("AggregateCounts needs at least one setting");
}

std::size_t AggregateCounts::index(std::size_t setting_id, BellOutcome outcome) const {
  if (setting_id >= n_settings()) {
    throw std::out_of_range("setting id " + std::to_string(setting_id) + " out of range");
  }
  if (outcome == BellOutcome::NoResult) {
    throw std::out_of_range("NoResult has no coincidence cell");
  }
  return setting_id * kBellStateCount + static_cast<std::size_t>(outcome);
}

std::uint64_t AggregateCounts::setting_trials(std::size_t setting_id) const {
  if (setting_id >= n_settings()) {
    throw std::out_of_range("setting id " + std::to_string(setting_id) + " out of range");
  }
  return setting_trials_[setting_id];
}

const CellCounts& AggregateCounts::cell(std::size_t setting_id, BellOutcome outcome) const {
  return cells_[index(setting_id, outcome)];
}

std::uint64_t AggregateCounts::outcome_events(BellOutcome outcome) const {
  std::uint64_t total = 0;
  for (std::size_t s = 0; s < n_settings(); ++s) total += cell(s, outcome).events();
  return total;
}

std::uint64_t AggregateCounts::outcome_coincidences(BellOutcome outcome) const {
  std::uint64_t total = 0;
  for (std::size_t s = 0; s < n_settings(); ++s) total += cell(s, outcome).coincidences();
  return total;
}

void AggregateCounts::add(const TrialRecord& trial) {
  if (trial.bell == BellOutcome::NoResult) {
    add_no_result(trial.setting_id);
    return;
  }
  CellCounts& c = cells_[index(trial.setting_id, trial.bell)];
  ++setting_trials_[trial.setting_id];
  ++n_trials_;
  ++n_bell_result_;
  const bool bob_plus = trial.bob == DetectorOutcome::Plus;
  switch (trial.alice) {
    case DetectorOutcome::NoDetect: ++c.n_alice_nodetect; break;
    case DetectorOutcome::Plus: ++(bob_plus ? c.n_pp : c.n_pm); break;
    case DetectorOutcome::Minus: ++(bob_plus ? c.n_mp : c.n_mm); break;
  }
}

void AggregateCounts::add_cell(std::size_t setting_id, BellOutcome outcome,
                               const CellCounts& counts) {
  cells_[index(setting_id, outcome)] += counts;
  setting_trials_[setting_id] += counts.events();
  n_trials_ += counts.events();
  n_bell_result_ += counts.events();
}

void AggregateCounts::add_no_result(std::size_t setting_id, std::uint64_t n) {
  if (setting_id >= n_settings()) {
    throw std::out_of_range("setting id " + std::to_string(setting_id) + " out of range");
  }
  setting_trials_[setting_id] += n;
  n_trials_ += n;
}

AggregateCounts& AggregateCounts::operator+=(const AggregateCounts& other) {
  if (other.n_settings() != n_settings()) {
    throw std::invalid_argument("cannot merge aggregates over different setting domains");
  }
  for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += other.cells_[i];
  for (std::size_t s = 0; s < setting_trials_.size(); ++s) {
    setting_trials_[s] += other.setting_trials_[s];
  }
  n_trials_ += other.n_trials_;
  n_bell_result_ += other.n_bell_result_;
  return *this;
}

AggregateCounts accumulate(AggregateCounts agg, const TrialRecord& trial) {
  agg.add(trial);
  return agg;
}

AggregateCounts merge(AggregateCounts lhs, const AggregateCounts& rhs) {
  lhs += rhs;
  return lhs;
}

Estimate binomial_fraction(std::uint64_t k, std::uint64_t n) {
  if (n == 0) throw EmptyCellError("fraction over zero trials");
  const double p = static_cast<double>(k) / static_cast<double>(n);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n))};
}

CorrelationEstimate correlation(const CellCounts& counts) {
  const std::uint64_t n = counts.coincidences();
  if (n == 0) throw EmptyCellError("correlation requested for a cell without coincidences");
  const double same = static_cast<double>(counts.n_pp + counts.n_mm);
  const double diff = static_cast<double>(counts.n_pm + counts.n_mp);
  const double e = (same - diff) / static_cast<double>(n);
  return {e, std::sqrt(std::max(0.0, 1.0 - e * e) / static_cast<double>(n)), n};
}

CorrelationEstimate correlation(const AggregateCounts& agg, std::size_t setting_id,
                                BellOutcome outcome) {
  return correlation(agg.cell(setting_id, outcome));
}

std::array<double, 4> joint_probabilities(const CellCounts& counts) {
  const std::uint64_t n = counts.coincidences();
  if (n == 0) throw EmptyCellError("joint probabilities requested for a cell without coincidences");
  const double inv = 1.0 / static_cast<double>(n);
  return {static_cast<double>(counts.n_pp) * inv, static_cast<double>(counts.n_pm) * inv,
          static_cast<double>(counts.n_mp) * inv, static_cast<double>(counts.n_mm) * inv};
}

std::array<double, 4> joint_probabilities(const AggregateCounts& agg, std::size_t setting_id,
                                          BellOutcome outcome) {
  return joint_probabilities(agg.cell(setting_id, outcome));
}

Estimate visibility(const AggregateCounts& agg, BellOutcome outcome,
                    std::span<const std::size_t> parallel_setting_ids) {
  if (parallel_setting_ids.empty()) throw std::invalid_argument("visibility needs settings");
  double sum = 0.0;
  double var = 0.0;
  for (const std::size_t id : parallel_setting_ids) {
    const CorrelationEstimate e = correlation(agg, id, outcome);
    sum += e.value;
    var += e.std_error * e.std_error;
  }
  const auto n = static_cast<double>(parallel_setting_ids.size());
  return {-sum / n, std::sqrt(var) / n};
}

namespace {

// E(a, b) = t E(a, R_k a) where R_k b = t a.
double frame_sign(BellOutcome outcome, const FrameSetting& setting) {
  const double t = dot(setting.alice, branch_frame(outcome, setting.bob));
  if (std::abs(std::abs(t) - 1.0) > 1e-9) {
    throw std::invalid_argument("setting " + std::to_string(setting.setting_id) +
                                " is not parallel in the " + std::string(to_string(outcome)) +
                                " frame");
  }
  return t > 0.0 ? 1.0 : -1.0;
}

}  // namespace

Estimate frame_visibility(const AggregateCounts& agg, BellOutcome outcome,
                          std::span<const FrameSetting> settings) {
  if (settings.empty()) throw std::invalid_argument("frame_visibility needs settings");
  double sum = 0.0;
  double var = 0.0;
  for (const FrameSetting& s : settings) {
    const double sign = frame_sign(outcome, s);
    const CorrelationEstimate e = correlation(agg, s.setting_id, outcome);
    sum += sign * e.value;
    var += e.std_error * e.std_error;
  }
  const auto n = static_cast<double>(settings.size());
  return {-sum / n, std::sqrt(var) / n};
}

double fidelity_from_visibility(double visibility) { return (1.0 + 3.0 * visibility) / 4.0; }

Estimate fidelity(const AggregateCounts& agg, BellOutcome outcome,
                  std::span<const FrameSetting> settings) {
  const Estimate v = frame_visibility(agg, outcome, settings);
  return {fidelity_from_visibility(v.value), 0.75 * v.std_error};
}

Estimate pooled_fidelity(const AggregateCounts& agg, std::span<const FrameSetting> settings) {
  if (settings.empty()) throw std::invalid_argument("pooled_fidelity needs settings");
  double signed_sum = 0.0;
  std::uint64_t n = 0;
  for (const BellOutcome outcome : kBellStates) {
    for (const FrameSetting& s : settings) {
      const double sign = frame_sign(outcome, s);
      const CellCounts& c = agg.cell(s.setting_id, outcome);
      signed_sum += sign * (static_cast<double>(c.n_pp + c.n_mm) -
                            static_cast<double>(c.n_pm + c.n_mp));
      n += c.coincidences();
    }
  }
  if (n == 0) throw EmptyCellError("no coincidences in any Bell branch");
  const double e = signed_sum / static_cast<double>(n);
  const double se = std::sqrt(std::max(0.0, 1.0 - e * e) / static_cast<double>(n));
  return {fidelity_from_visibility(-e), 0.75 * se};
}

Estimate chsh_from_counts(const AggregateCounts& agg, const std::array<std::size_t, 4>& setting_ids,
                          BellOutcome outcome) {
  static constexpr std::array<double, 4> kSigns = {1.0, 1.0, 1.0, -1.0};
  double s = 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const CorrelationEstimate e = correlation(agg, setting_ids[i], outcome);
    s += kSigns[i] * e.value;
    var += e.std_error * e.std_error;
  }
  return {s, std::sqrt(var)};
}

namespace {

std::size_t count_distinct_angles(std::span<const AngleSample> samples) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  std::vector<double> reduced;
  reduced.reserve(samples.size());
  for (const AngleSample& s : samples) {
    double r = std::fmod(s.angle_rad, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    reduced.push_back(r);
  }
  std::sort(reduced.begin(), reduced.end());
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < reduced.size(); ++i) {
    if (i == 0 || reduced[i] - reduced[i - 1] > 1e-12) ++distinct;
  }
  // 0 and 2pi - epsilon are the same point on the circle.
  if (distinct > 1 && kTwoPi - reduced.back() + reduced.front() <= 1e-12) --distinct;
  return distinct;
}

}  // namespace

SinusoidFit fit_sinusoid(std::span<const AngleSample> samples) {
  if (count_distinct_angles(samples) < 3) {
    throw RankDeficientError("sinusoid fit needs at least three distinct angles");
  }
  const bool weighted =
      std::all_of(samples.begin(), samples.end(), [](const AngleSample& s) { return s.sigma > 0.0; });

  Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (const AngleSample& s : samples) {
    const Eigen::Vector3d row(1.0, std::cos(s.angle_rad), std::sin(s.angle_rad));
    const double w = weighted ? 1.0 / (s.sigma * s.sigma) : 1.0;
    normal.noalias() += w * row * row.transpose();
    rhs.noalias() += w * s.value * row;
  }
  const Eigen::LDLT<Eigen::Matrix3d> ldlt(normal);
  if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-12) {
    throw RankDeficientError("sinusoid design matrix is singular");
  }
  const Eigen::Vector3d coef = ldlt.solve(rhs);

  SinusoidFit fit;
  fit.c_offset = coef[0];
  fit.a_cos = coef[1];
  fit.b_sin = coef[2];
  fit.amplitude = std::hypot(fit.a_cos, fit.b_sin);
  fit.phase = std::atan2(fit.b_sin, fit.a_cos);
  fit.weighted = weighted;
  fit.dof = samples.size() - 3;

  double rss = 0.0;
  double chi2 = 0.0;
  for (const AngleSample& s : samples) {
    const double r = s.value - (fit.c_offset + fit.a_cos * std::cos(s.angle_rad) +
                                fit.b_sin * std::sin(s.angle_rad));
    rss += r * r;
    if (weighted) chi2 += (r / s.sigma) * (r / s.sigma);
  }
  fit.rms_residual = std::sqrt(rss / static_cast<double>(samples.size()));
  fit.chi2 = chi2;

  Eigen::Matrix3d cov = ldlt.solve(Eigen::Matrix3d::Identity());
  if (!weighted) cov *= fit.dof > 0 ? rss / static_cast<double>(fit.dof) : 0.0;
  fit.offset_stderr = std::sqrt(std::max(0.0, cov(0, 0)));
  const double a = fit.a_cos;
  const double b = fit.b_sin;
  double amp_var = 0.0;
  if (fit.amplitude > 0.0) {
    amp_var = (a * a * cov(1, 1) + b * b * cov(2, 2) + 2.0 * a * b * cov(1, 2)) /
              (fit.amplitude * fit.amplitude);
  } else {
    amp_var = 0.5 * (cov(1, 1) + cov(2, 2));
  }
  fit.amplitude_stderr = std::sqrt(std::max(0.0, amp_var));
  return fit;
}

}  // namespace lhvswap
