#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lhvswap/runner.hpp"

using namespace lhvswap;
using namespace lhvswap::runner;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScenarioConfig golden_config() {
  ScenarioConfig c;
  c.scenario = Scenario::PartialSwap;
  c.eta = 1.0;
  c.n_trials = 2000;
  c.seed = 7;
  c.n_shards = 3;
  c.alice = {0, 0};
  c.bob_settings = {{60, 0}, {90, 45}};
  return c;
}

std::string first_line(const std::string& text) { return text.substr(0, text.find('\n')); }

}  // namespace

TEST(Parsing, AngleSetting) {
  EXPECT_EQ(parse_angle_setting("35, 20"), (AngleSetting{35, 20}));
  EXPECT_THROW(parse_angle_setting("35"), ConfigError);
  EXPECT_THROW(parse_angle_setting("a,b"), ConfigError);
}

TEST(Parsing, BobSweep) {
  const BobSweep s = parse_bob_sweep("plane=yz,start=10,stop=100,step=30");
  EXPECT_EQ(s.plane, SweepPlane::YZ);
  EXPECT_EQ(s.angles_deg(), (std::vector<double>{10, 40, 70}));
  EXPECT_EQ(parse_bob_sweep("plane=xz").angles_deg().size(), 72u);
  EXPECT_THROW(parse_bob_sweep("plane=ab"), ConfigError);
  EXPECT_THROW(parse_bob_sweep("bogus=1"), ConfigError);
}

TEST(Parsing, SweepDirections) {
  const BobSweep xz{SweepPlane::XZ};
  EXPECT_EQ(xz.direction(0), UnitVec3::from_unit(0, 0, 1));
  EXPECT_EQ(xz.direction(90), UnitVec3::from_unit(1, 0, 0));
  const BobSweep xy{SweepPlane::XY};
  EXPECT_EQ(xy.direction(90), UnitVec3::from_unit(0, 1, 0));
  const BobSweep yz{SweepPlane::YZ};
  EXPECT_EQ(yz.direction(90), UnitVec3::from_unit(0, 1, 0));
}

TEST(Parsing, Limits) {
  EXPECT_EQ(parse_limits("0:1:0.25"), (std::vector<double>{0, 0.25, 0.5, 0.75, 1}));
  EXPECT_EQ(parse_limits("0:1:0.1").size(), 11u);
  EXPECT_EQ(parse_limits("0:1:0.1")[3], 0.3);
  EXPECT_EQ(parse_limits("0.5, 0.9"), (std::vector<double>{0.5, 0.9}));
  EXPECT_THROW(parse_limits("0,1.5"), ConfigError);
}

TEST(Config, ValidationNamesField) {
  ScenarioConfig c;
  c.eta = 1.5;
  try {
    c.validate();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "eta");
  }
  c = {};
  c.n_shards = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.bob_sweep = BobSweep{SweepPlane::XZ, 0, 360, 7};
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, JsonOverlay) {
  const ScenarioConfig c = apply_json_config(R"({
    "scenario": "complete_swap", "limit": 0.7, "samples": 500, "seed": 9, "shards": 2,
    "alice": [90, 0], "bob_sweep": {"plane": "xy", "step": 45}, "format": "json"})");
  EXPECT_EQ(c.scenario, Scenario::CompleteSwap);
  EXPECT_EQ(c.limit, 0.7);
  EXPECT_EQ(c.n_trials, 500u);
  EXPECT_EQ(c.alice, (AngleSetting{90, 0}));
  ASSERT_TRUE(c.bob_sweep.has_value());
  EXPECT_EQ(c.bob_sweep->plane, SweepPlane::XY);
  EXPECT_EQ(c.bob_sweep->angles_deg().size(), 8u);
  EXPECT_EQ(c.output_format, OutputFormat::Json);
  EXPECT_THROW(apply_json_config(R"({"unknown": 1})"), ConfigError);
  EXPECT_THROW(apply_json_config(R"({"eta": "high"})"), ConfigError);
  EXPECT_THROW(apply_json_config("{"), ConfigError);
  EXPECT_THROW(apply_json_config(R"({"bob": ["0,0"], "bob_sweep": "plane=xz"})"), ConfigError);
}

TEST(ExpandSettings, DefaultsToParallel) {
  ScenarioConfig c;
  c.alice = {35, 20};
  const auto s = expand_settings(c);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].alice, s[0].bob);
  c.bob_sweep = BobSweep{SweepPlane::XZ, 0, 360, 90};
  const auto sweep = expand_settings(c);
  ASSERT_EQ(sweep.size(), 4u);
  EXPECT_EQ(*sweep[1].sweep_angle_deg, 90.0);
}

TEST(Simulate, DeterministicPerSeedAndShards) {
  const std::vector<Setting> settings = expand_settings(golden_config());
  const ModelParams model = CompleteSwapParams(0.5);
  const AggregateCounts a = simulate(model, settings, 10'001, 3, 4);
  const AggregateCounts b = simulate(model, settings, 10'001, 3, 4);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.n_trials(), 2u * 10'001u);
  EXPECT_EQ(a.setting_trials(1), 10'001u);
  const AggregateCounts c = simulate(model, settings, 10'001, 4, 4);
  EXPECT_NE(a, c);
  const AggregateCounts d = simulate(model, settings, 10'001, 3, 7);
  EXPECT_EQ(d.n_trials(), a.n_trials());
}

TEST(Simulate, SingleShardMatchesSequentialTrials) {
  const std::vector<Setting> settings = expand_settings(ScenarioConfig{});
  const AggregateCounts agg = simulate(SingletParams{}, settings, 1000, 11, 1);
  RandomStream stream(11, 0);
  AggregateCounts manual(1);
  for (int i = 0; i < 1000; ++i) manual.add(run_trial(SingletParams{}, settings[0].alice, settings[0].bob, stream));
  EXPECT_EQ(agg, manual);
}

TEST(Golden, RunCsv) {
  const RunResult r = cmd_run(golden_config());
  std::stringstream ss;
  write_run(ss, r, OutputFormat::Csv);
  EXPECT_EQ(ss.str(), slurp(LHVSWAP_FIXTURE_DIR "/golden_run.csv"));
}

TEST(Schema, Headers) {
  std::stringstream limit, fid, verify;
  write_limit_curve(limit, cmd_sweep_limit(std::vector<double>{0.0, 1.0}, 100, 1, 2), OutputFormat::Csv);
  EXPECT_EQ(first_line(limit.str()), "limit,n_trials,p_result,stderr");
  write_fidelity_curve(fid, cmd_fidelity_curve(std::vector<double>{0.0}, 300, 1, 2), OutputFormat::Csv);
  EXPECT_EQ(first_line(fid.str()), "limit,p_result,fidelity,stderr");
  write_verify(verify, std::vector<VerifyRow>{}, OutputFormat::Csv);
  EXPECT_EQ(first_line(verify.str()), "quantity,analytic,monte_carlo,oracle,abs_diff,sigma,pass");

  ScenarioConfig c;
  c.scenario = Scenario::PartialSwap;
  c.n_trials = 2000;
  c.bob_sweep = BobSweep{SweepPlane::XZ, 0, 360, 45};
  const AngleSweepResult sweep = cmd_angle_sweep(c);
  std::stringstream rows, fits;
  write_angle_sweep(rows, sweep, OutputFormat::Csv);
  EXPECT_EQ(first_line(rows.str()), "angle_deg,bell_outcome,n_coinc,p_pp,p_pm,p_mp,p_mm,E,E_stderr");
  write_sweep_fits(fits, sweep);
  EXPECT_EQ(first_line(fits.str()),
            "bell_outcome,curve,offset,a_cos,b_sin,amplitude,phase_deg,rms_residual,offset_stderr,"
            "amplitude_stderr,chi2,dof,error");
  EXPECT_EQ(sweep.rows.size(), 8u);
  EXPECT_EQ(sweep.fits.size(), kSweepCurves.size());
}

TEST(SweepLimit, EndpointsAndCommonDraws) {
  const auto rows = cmd_sweep_limit(std::vector<double>{1.0, 0.0, 0.5}, 20'000, 5, 3);
  EXPECT_EQ(rows[0].p_result, 0.0);
  EXPECT_EQ(rows[1].p_result, 1.0);
  EXPECT_EQ(rows[2].limit, 0.5);
  const auto alone = cmd_sweep_limit(std::vector<double>{0.5}, 20'000, 5, 3);
  EXPECT_EQ(alone[0].p_result, rows[2].p_result);
}

TEST(FidelityCurve, EmptyBranchPropagates) {
  EXPECT_THROW(cmd_fidelity_curve(std::vector<double>{1.0}, 100, 1, 1), EmptyCellError);
}

TEST(AngleSweep, RequiresSweep) {
  ScenarioConfig c;
  EXPECT_THROW(cmd_angle_sweep(c), ConfigError);
  c.bob_sweep = BobSweep{SweepPlane::XZ, 0, 360, 60};
  EXPECT_THROW(cmd_angle_sweep(c), ConfigError);
}

TEST(AngleSweep, SkipsOutcomesWithoutEvents) {
  ScenarioConfig c;
  c.scenario = Scenario::PartialSwap;
  c.eta = 0.0;
  c.n_trials = 100;
  c.bob_sweep = BobSweep{SweepPlane::XZ, 0, 360, 45};
  const AngleSweepResult r = cmd_angle_sweep(c);
  EXPECT_TRUE(r.fits.empty());
  EXPECT_EQ(r.rows.size(), 0u);
}

TEST(Verify, AllRowsPassAtModestSampleSize) {
  VerifyOptions o;
  o.n_trials = 100'000;
  o.oracle_grid = 40;
  o.oracle_tolerance = 1e-2;
  const auto rows = cmd_verify(o);
  EXPECT_GE(rows.size(), 40u);
  for (const auto& r : rows) EXPECT_TRUE(r.pass) << r.quantity;
  bool has_mean = false, has_chsh = false;
  for (const auto& r : rows) {
    has_mean |= r.quantity == "mean detection efficiency (singlet model)" && r.analytic == 0.75;
    has_chsh |= r.quantity == "conditional CHSH |S| partial swap eta=1" &&
                std::abs(r.analytic - 2.1213203) < 1e-6;
  }
  EXPECT_TRUE(has_mean);
  EXPECT_TRUE(has_chsh);
}

TEST(Fixture, FileCoversReferenceKeys) {
  const oracle::Fixture fx = oracle::load_fixture(LHVSWAP_FIXTURE_DIR "/oracle_reference.tsv");
  for (const double l : reference_limits()) {
    EXPECT_TRUE(fx.contains(fixture_keys::bell_result_prob(l))) << l;
    EXPECT_TRUE(fx.contains(fixture_keys::fidelity(l))) << l;
  }
  for (const FigureSpec& f : figure_specs()) {
    EXPECT_TRUE(fx.contains(fixture_keys::figure_limit(f.name)));
    EXPECT_TRUE(fx.contains(fixture_keys::sweep_fit(f.name, BellOutcome::PsiMinus, "E", "amplitude")));
  }
  EXPECT_EQ(fx.at(fixture_keys::bell_result_prob(1.0)).value, 0.0);
  EXPECT_NEAR(fx.at(fixture_keys::bell_result_prob(0.0)).value, 1.0, 1e-12);
}
