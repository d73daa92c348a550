#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lhvswap/estimators.hpp"
#include "lhvswap/models.hpp"
#include "lhvswap/oracle.hpp"
#include "lhvswap/sphere.hpp"

namespace lhvswap::runner {

/// Invalid configuration; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class Scenario { Singlet, PartialSwap, CompleteSwap };
enum class OutputFormat { Csv, Json };
enum class SweepPlane { XZ, XY, YZ };

std::string_view to_string(Scenario scenario);
std::string_view to_string(SweepPlane plane);
Scenario parse_scenario(std::string_view text);
OutputFormat parse_format(std::string_view text);

/// Analyzer direction as (theta, phi) in degrees.
struct AngleSetting {
  double theta_deg = 0.0;
  double phi_deg = 0.0;

  UnitVec3 direction() const { return UnitVec3::from_angles_deg(theta_deg, phi_deg); }
  bool operator==(const AngleSetting&) const = default;
};

/// Bob's analyzer rotated in a coordinate plane over [start, stop) in steps.
/// xz: from +z toward +x; xy: from +x toward +y; yz: from +z toward +y.
struct BobSweep {
  SweepPlane plane = SweepPlane::XZ;
  double start_deg = 0.0;
  double stop_deg = 360.0;
  double step_deg = 5.0;

  std::vector<double> angles_deg() const;
  UnitVec3 direction(double angle_deg) const;
  bool operator==(const BobSweep&) const = default;
};

/// "theta,phi"
AngleSetting parse_angle_setting(std::string_view text);
/// "plane=xz,start=0,stop=360,step=5"; omitted keys keep their defaults.
BobSweep parse_bob_sweep(std::string_view text);
/// Either "start:stop:step" (stop included) or a comma-separated list.
std::vector<double> parse_limits(std::string_view text);

struct ScenarioConfig {
  Scenario scenario = Scenario::Singlet;
  double eta = 1.0;
  double limit = 0.0;
  /// Trials per setting (per sweep point, per limit curve).
  std::uint64_t n_trials = 1'000'000;
  std::uint64_t seed = 1;
  std::size_t n_shards = 4;
  AngleSetting alice{};
  std::vector<AngleSetting> bob_settings;
  std::optional<BobSweep> bob_sweep;
  std::vector<double> limits;
  std::string output_path;
  OutputFormat output_format = OutputFormat::Csv;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
  ModelParams model() const;
};

/// Overlays the keys present in a JSON document onto `base`. Keys: scenario,
/// eta, limit, samples, seed, shards, alice, bob, bob_sweep, limits, out, format.
ScenarioConfig apply_json_config(const std::string& json_text, ScenarioConfig base = {});
ScenarioConfig load_config_file(const std::string& path, ScenarioConfig base = {});

/// One measured analyzer pair.
struct Setting {
  AngleSetting alice_deg;
  AngleSetting bob_deg;
  UnitVec3 alice;
  UnitVec3 bob;
  /// Sweep angle of Bob's analyzer, when the setting comes from a sweep.
  std::optional<double> sweep_angle_deg;
};

/// Expands the config into its setting list: explicit Bob settings, a sweep,
/// or by default Bob parallel to Alice.
std::vector<Setting> expand_settings(const ScenarioConfig& config);

/// Runs n_trials per setting. Shard i draws from stream (seed, i) and handles
/// trial indices congruent to i modulo n_shards; shards run concurrently and
/// are merged in shard order.
AggregateCounts simulate(const ModelParams& model, std::span<const Setting> settings,
                         std::uint64_t n_trials, std::uint64_t seed, std::size_t n_shards);

struct RunResult {
  ScenarioConfig config;
  std::vector<Setting> settings;
  AggregateCounts counts;
};

/// Simulates the configured scenario and writes the per-setting, per-outcome
/// table to config.output_path when it is set.
RunResult cmd_run(const ScenarioConfig& config);
void write_run(std::ostream& out, const RunResult& result, OutputFormat format);

struct LimitCurveRow {
  double limit = 0.0;
  std::uint64_t n_trials = 0;
  double p_result = 0.0;
  double std_error = 0.0;
};

/// Bell-result probability of the complete-swap model at each limit. All
/// limits are evaluated on the same hidden-variable draws.
std::vector<LimitCurveRow> cmd_sweep_limit(std::span<const double> limits, std::uint64_t n_trials,
                                           std::uint64_t seed, std::size_t n_shards);
void write_limit_curve(std::ostream& out, std::span<const LimitCurveRow> rows, OutputFormat format);

struct FidelityRow {
  double limit = 0.0;
  double p_result = 0.0;
  double fidelity = 0.0;
  double std_error = 0.0;
};

/// Pooled fidelity versus limit. Trials cycle through parallel analyzers
/// along x, y and z; draws are shared across limits. Throws EmptyCellError
/// when a limit accepts no trial.
std::vector<FidelityRow> cmd_fidelity_curve(std::span<const double> limits, std::uint64_t n_trials,
                                            std::uint64_t seed, std::size_t n_shards);
void write_fidelity_curve(std::ostream& out, std::span<const FidelityRow> rows,
                          OutputFormat format);

struct SweepRow {
  double angle_deg = 0.0;
  BellOutcome outcome = BellOutcome::PsiMinus;
  std::uint64_t n_coinc = 0;
  std::array<double, 4> joint{};
  double correlation = 0.0;
  double std_error = 0.0;
};

/// Named curves fitted per Bell outcome.
inline constexpr std::array<std::string_view, 5> kSweepCurves = {"E", "p_pp", "p_pm", "p_mp",
                                                                 "p_mm"};

struct CurveFit {
  BellOutcome outcome = BellOutcome::PsiMinus;
  std::string curve;
  std::optional<SinusoidFit> fit;
  /// Set when the fit failed (for example too few non-empty points).
  std::string error;
};

struct AngleSweepResult {
  RunResult run;
  std::vector<SweepRow> rows;
  std::vector<CurveFit> fits;

  const CurveFit& fit(BellOutcome outcome, std::string_view curve) const;
};

/// Runs a Bob sweep (at least 8 points) and fits a first-harmonic sinusoid to
/// every curve of every Bell outcome that produced coincidences.
AngleSweepResult cmd_angle_sweep(const ScenarioConfig& config);
void write_angle_sweep(std::ostream& out, const AngleSweepResult& result, OutputFormat format);
void write_sweep_fits(std::ostream& out, const AngleSweepResult& result);

struct VerifyRow {
  std::string quantity;
  double analytic = 0.0;
  double monte_carlo = 0.0;
  std::optional<double> oracle;
  double abs_diff = 0.0;
  double sigma = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  std::uint64_t n_trials = 1'000'000;
  std::uint64_t seed = 20240101;
  std::size_t n_shards = 4;
  /// Grid used for the oracle column.
  std::size_t oracle_grid = 60;
  /// Allowed |oracle - analytic| at that grid.
  double oracle_tolerance = 5e-3;
};

/// Closed-form claims against Monte Carlo (4 sigma) and the quadrature oracle.
std::vector<VerifyRow> cmd_verify(const VerifyOptions& options);
void write_verify(std::ostream& out, std::span<const VerifyRow> rows, OutputFormat format);

struct OracleOptions {
  std::size_t symmetric_grid = 400;
  std::size_t general_grid = 200;
};

/// Recomputes every reference value the test suite reads; each entry's error
/// bound is its change under halving of the grid resolution.
oracle::Fixture cmd_oracle(const OracleOptions& options);

/// Angle-sweep experiments at a fixed Bell-measurement efficiency: the
/// limit is found by inverting the oracle's result-probability curve.
struct FigureSpec {
  std::string name;
  double target_result_prob = 0.5;
  AngleSetting alice;
  BobSweep sweep;
};

/// eff50: efficiency ~50%; eff90: ~90%. Both use Alice along z and Bob swept in
/// the xz plane in 10 degree steps.
std::vector<FigureSpec> figure_specs();

/// Limits of the reference fidelity and result-probability curves.
std::vector<double> reference_limits();

/// Key layout of the reference fixture.
namespace fixture_keys {
std::string bell_result_prob(double limit);
std::string limit_for_result_prob(double target);
std::string fidelity(double limit);
/// Conditional E(e, e) for a coordinate axis e ('x', 'y' or 'z').
std::string complete_swap_correlation(double limit, BellOutcome outcome, char axis);
std::string figure_limit(std::string_view figure);
std::string sweep_value(std::string_view figure, BellOutcome outcome, double angle_deg,
                        std::string_view curve);
std::string sweep_fit(std::string_view figure, BellOutcome outcome, std::string_view curve,
                      std::string_view field);
std::string partial_swap(std::string_view quantity, double eta, std::string_view pair);
}  // namespace fixture_keys

/// Setting pairs used for the partial-swap reference values.
struct PartialSwapPair {
  std::string name;
  UnitVec3 alice;
  UnitVec3 bob;
};
std::vector<PartialSwapPair> partial_swap_reference_pairs();
inline constexpr std::array<double, 3> kReferenceEtas = {0.2, 0.4, 1.0};

/// Opens `path` for writing, throwing std::runtime_error on failure.
std::ofstream open_output(const std::string& path);

}  // namespace lhvswap::runner
