#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "lhvswap/models.hpp"
#include "lhvswap/sphere.hpp"

namespace lhvswap {

/// Counts for one (setting, Bell outcome) cell. Indices are Alice x Bob signs.
struct CellCounts {
  std::uint64_t n_pp = 0;
  std::uint64_t n_pm = 0;
  std::uint64_t n_mp = 0;
  std::uint64_t n_mm = 0;
  std::uint64_t n_alice_nodetect = 0;

  std::uint64_t coincidences() const { return n_pp + n_pm + n_mp + n_mm; }
  /// Trials in which the Bell measurement gave this outcome.
  std::uint64_t events() const { return coincidences() + n_alice_nodetect; }

  CellCounts& operator+=(const CellCounts& other);
  bool operator==(const CellCounts&) const = default;
};

/// Coincidence table N(alice, bob | setting, Bell outcome) plus totals.
/// Merging is entrywise addition, so per-worker instances can be combined in
/// any order.
class AggregateCounts {
 public:
  explicit AggregateCounts(std::size_t n_settings = 1);

  std::size_t n_settings() const { return setting_trials_.size(); }
  std::uint64_t n_trials() const { return n_trials_; }
  std::uint64_t n_bell_result() const { return n_bell_result_; }
  std::uint64_t setting_trials(std::size_t setting_id) const;

  /// Throws std::out_of_range for an unknown setting or NoResult.
  const CellCounts& cell(std::size_t setting_id, BellOutcome outcome) const;

  /// Trials with the given Bell outcome summed over settings.
  std::uint64_t outcome_events(BellOutcome outcome) const;
  std::uint64_t outcome_coincidences(BellOutcome outcome) const;

  void add(const TrialRecord& trial);
  /// Bulk insertion of pre-tallied counts; keeps the totals consistent.
  void add_cell(std::size_t setting_id, BellOutcome outcome, const CellCounts& counts);
  void add_no_result(std::size_t setting_id, std::uint64_t n = 1);

  /// Throws std::invalid_argument when the setting domains differ.
  AggregateCounts& operator+=(const AggregateCounts& other);
  bool operator==(const AggregateCounts&) const = default;

 private:
  std::size_t index(std::size_t setting_id, BellOutcome outcome) const;

  std::vector<CellCounts> cells_;
  std::vector<std::uint64_t> setting_trials_;
  std::uint64_t n_trials_ = 0;
  std::uint64_t n_bell_result_ = 0;
};

AggregateCounts accumulate(AggregateCounts agg, const TrialRecord& trial);
AggregateCounts merge(AggregateCounts lhs, const AggregateCounts& rhs);

/// Raised when a conditional statistic is requested from a cell without
/// coincidences.
class EmptyCellError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by fit_sinusoid when the design matrix is (numerically) singular.
class RankDeficientError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct CorrelationEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t n_coinc = 0;
};

/// Fraction k/n with its binomial standard error. Throws EmptyCellError for n = 0.
Estimate binomial_fraction(std::uint64_t k, std::uint64_t n);

CorrelationEstimate correlation(const CellCounts& counts);
CorrelationEstimate correlation(const AggregateCounts& agg, std::size_t setting_id,
                                BellOutcome outcome);

/// (p_pp, p_pm, p_mp, p_mm) over coincidences.
std::array<double, 4> joint_probabilities(const CellCounts& counts);
std::array<double, 4> joint_probabilities(const AggregateCounts& agg, std::size_t setting_id,
                                          BellOutcome outcome);

/// Minus the mean correlation over settings with b = a.
Estimate visibility(const AggregateCounts& agg, BellOutcome outcome,
                    std::span<const std::size_t> parallel_setting_ids);

/// A measured setting together with its analyzer directions.
struct FrameSetting {
  std::size_t setting_id = 0;
  UnitVec3 alice;
  UnitVec3 bob;
};

/// Visibility in the frame of the outcome's Bell state: each setting must
/// satisfy R_k b = +-a, and its correlation is mapped to E(a, R_k a).
/// Throws std::invalid_argument for a setting that is not parallel in that frame.
Estimate frame_visibility(const AggregateCounts& agg, BellOutcome outcome,
                          std::span<const FrameSetting> settings);

/// Werner-state singlet fidelity (1 + 3V)/4.
double fidelity_from_visibility(double visibility);

Estimate fidelity(const AggregateCounts& agg, BellOutcome outcome,
                  std::span<const FrameSetting> settings);

/// Fidelity with the four Bell branches pooled after rotating each into the
/// singlet frame.
Estimate pooled_fidelity(const AggregateCounts& agg, std::span<const FrameSetting> settings);

/// Setting ids in CHSH order (a,b), (a,b'), (a',b), (a',b').
Estimate chsh_from_counts(const AggregateCounts& agg, const std::array<std::size_t, 4>& setting_ids,
                          BellOutcome outcome);

struct AngleSample {
  double angle_rad = 0.0;
  double value = 0.0;
  /// Per-point standard error; when every sample carries one the fit is weighted.
  double sigma = 0.0;
};

/// y ~ c_offset + a_cos cos(theta) + b_sin sin(theta)
struct SinusoidFit {
  double c_offset = 0.0;
  double a_cos = 0.0;
  double b_sin = 0.0;
  double amplitude = 0.0;
  double phase = 0.0;  ///< atan2(b_sin, a_cos), radians
  double rms_residual = 0.0;
  double offset_stderr = 0.0;
  double amplitude_stderr = 0.0;
  /// Sum of squared normalized residuals; zero for unweighted fits.
  double chi2 = 0.0;
  std::size_t dof = 0;
  bool weighted = false;
};

/// Least squares through the 3x3 normal equations. Throws RankDeficientError
/// with fewer than three distinct angles or a singular design.
SinusoidFit fit_sinusoid(std::span<const AngleSample> samples);

}  // namespace lhvswap
