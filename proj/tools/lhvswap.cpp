#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "lhvswap/oracle.hpp"
#include "lhvswap/runner.hpp"

namespace {

using namespace lhvswap;
using namespace lhvswap::runner;

// Flag values; anything left unset falls back to the config file, then to
// the subcommand default.
struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::string> scenario;
  std::optional<double> eta;
  std::optional<double> limit;
  std::optional<std::uint64_t> samples;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> shards;
  std::optional<std::string> alice;
  std::vector<std::string> bob;
  std::optional<std::string> bob_sweep;
  std::optional<std::string> limits;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file; flags override its keys");
  cmd->add_option("--scenario", o.scenario, "singlet | partial_swap | complete_swap");
  cmd->add_option("--eta", o.eta, "Partial-swap efficiency in [0, 1]");
  cmd->add_option("--limit", o.limit, "Complete-swap acceptance limit in [0, 1]");
  cmd->add_option("--samples", o.samples, "Trials per setting (or per curve)");
  cmd->add_option("--seed", o.seed, "64-bit seed");
  cmd->add_option("--shards", o.shards, "Number of random substreams");
  cmd->add_option("--alice", o.alice, "Alice's analyzer \"theta,phi\" in degrees");
  cmd->add_option("--bob", o.bob, "Bob's analyzer \"theta,phi\" in degrees (repeatable)");
  cmd->add_option("--bob-sweep", o.bob_sweep, "\"plane=xz,start=0,stop=360,step=5\"");
  cmd->add_option("--limits", o.limits, "\"start:stop:step\" or a comma-separated list");
  cmd->add_option("--out", o.out, "Output path (default: stdout)");
  cmd->add_option("--format", o.format, "csv | json");
}

ScenarioConfig build_config(const Overrides& o, ScenarioConfig base) {
  if (o.config_path) base = load_config_file(*o.config_path, std::move(base));
  if (o.scenario) base.scenario = parse_scenario(*o.scenario);
  if (o.eta) base.eta = *o.eta;
  if (o.limit) base.limit = *o.limit;
  if (o.samples) base.n_trials = *o.samples;
  if (o.seed) base.seed = *o.seed;
  if (o.shards) base.n_shards = *o.shards;
  if (o.alice) base.alice = parse_angle_setting(*o.alice);
  if (!o.bob.empty()) {
    base.bob_settings.clear();
    for (const auto& b : o.bob) base.bob_settings.push_back(parse_angle_setting(b));
    base.bob_sweep.reset();
  }
  if (o.bob_sweep) {
    base.bob_sweep = parse_bob_sweep(*o.bob_sweep);
    if (o.bob.empty()) base.bob_settings.clear();
  }
  if (o.limits) base.limits = parse_limits(*o.limits);
  if (o.out) base.output_path = *o.out;
  if (o.format) base.output_format = parse_format(*o.format);
  return base;
}

template <typename Write>
void emit(const std::string& path, Write write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream out = open_output(path);
  write(out);
}

ScenarioConfig with_samples(std::uint64_t n) {
  ScenarioConfig c;
  c.n_trials = n;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local-hidden-variable models of Bell tests and entanglement swapping"};
  app.require_subcommand(1);

  Overrides run_o, limit_o, fid_o, sweep_o;
  auto* run = app.add_subcommand("run", "Simulate one scenario over a list of settings");
  add_common(run, run_o);

  auto* sweep_limit =
      app.add_subcommand("sweep-limit", "Complete-swap result probability versus limit");
  add_common(sweep_limit, limit_o);

  auto* fidelity = app.add_subcommand("fidelity-curve", "Complete-swap fidelity versus limit");
  add_common(fidelity, fid_o);

  auto* angle = app.add_subcommand("angle-sweep", "Rotate Bob's analyzer and fit sinusoids");
  add_common(angle, sweep_o);
  std::optional<std::string> figure;
  std::size_t figure_grid = oracle::kGeneralGridSize;
  angle->add_option("--figure", figure,
                    "eff50 | eff90: complete swap at the limit giving 50% / 90% Bell efficiency");
  angle->add_option("--figure-grid", figure_grid, "Oracle grid used to invert the efficiency");

  auto* verify = app.add_subcommand("verify", "Check closed forms against Monte Carlo and oracle");
  VerifyOptions vopt;
  std::string verify_out, verify_format = "csv";
  verify->add_option("--samples", vopt.n_trials, "Trials per row group");
  verify->add_option("--seed", vopt.seed, "64-bit seed");
  verify->add_option("--shards", vopt.n_shards, "Number of random substreams");
  verify->add_option("--oracle-grid", vopt.oracle_grid, "Oracle grid size");
  verify->add_option("--oracle-tolerance", vopt.oracle_tolerance, "Allowed |oracle - analytic|");
  verify->add_option("--out", verify_out, "Output path (default: stdout)");
  verify->add_option("--format", verify_format, "csv | json");

  auto* oracle_cmd = app.add_subcommand("oracle", "Regenerate the quadrature reference fixture");
  OracleOptions oopt;
  std::string oracle_out;
  oracle_cmd->add_option("--out", oracle_out, "Fixture path (default: stdout)");
  oracle_cmd->add_option("--symmetric-grid", oopt.symmetric_grid, "Grid for symmetric quantities");
  oracle_cmd->add_option("--general-grid", oopt.general_grid, "Grid for general settings");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      ScenarioConfig cfg = build_config(run_o, with_samples(1'000'000));
      const std::string out = cfg.output_path;
      cfg.output_path.clear();
      const RunResult result = cmd_run(cfg);
      emit(out, [&](std::ostream& os) { write_run(os, result, cfg.output_format); });
    } else if (*sweep_limit) {
      ScenarioConfig base = with_samples(100'000'000);
      base.limits = parse_limits("0:1:0.1");
      const ScenarioConfig cfg = build_config(limit_o, base);
      const auto rows = cmd_sweep_limit(cfg.limits, cfg.n_trials, cfg.seed, cfg.n_shards);
      emit(cfg.output_path,
           [&](std::ostream& os) { write_limit_curve(os, rows, cfg.output_format); });
    } else if (*fidelity) {
      ScenarioConfig base = with_samples(10'000'000);
      base.limits = reference_limits();
      const ScenarioConfig cfg = build_config(fid_o, base);
      const auto rows = cmd_fidelity_curve(cfg.limits, cfg.n_trials, cfg.seed, cfg.n_shards);
      emit(cfg.output_path,
           [&](std::ostream& os) { write_fidelity_curve(os, rows, cfg.output_format); });
    } else if (*angle) {
      ScenarioConfig base = with_samples(1'000'000);
      if (figure) {
        bool found = false;
        for (const FigureSpec& f : figure_specs()) {
          if (f.name != *figure) continue;
          found = true;
          base.scenario = Scenario::CompleteSwap;
          base.alice = f.alice;
          base.bob_sweep = f.sweep;
          base.limit = oracle::oracle_limit_for_result_prob(
              f.target_result_prob, oracle::SphereGrid(figure_grid, figure_grid));
          std::cerr << fmt::format("{}: limit {:.6f} for result probability {}\n", f.name,
                                   base.limit, f.target_result_prob);
        }
        if (!found) throw ConfigError("figure", "expected eff50 or eff90, got '" + *figure + "'");
      } else {
        base.bob_sweep = BobSweep{};
      }
      const ScenarioConfig cfg = build_config(sweep_o, base);
      const AngleSweepResult result = cmd_angle_sweep(cfg);
      if (cfg.output_path.empty()) {
        write_angle_sweep(std::cout, result, cfg.output_format);
        if (cfg.output_format == OutputFormat::Csv) {
          std::cout << "\n";
          write_sweep_fits(std::cout, result);
        }
      }
    } else if (*verify) {
      const OutputFormat format = parse_format(verify_format);
      const auto rows = cmd_verify(vopt);
      emit(verify_out, [&](std::ostream& os) { write_verify(os, rows, format); });
      std::size_t failed = 0;
      for (const auto& r : rows) failed += r.pass ? 0 : 1;
      std::cerr << fmt::format("{} of {} rows pass\n", rows.size() - failed, rows.size());
      return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
    } else if (*oracle_cmd) {
      const oracle::Fixture fx = cmd_oracle(oopt);
      emit(oracle_out, [&](std::ostream& os) { oracle::write_fixture(os, fx); });
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return EXIT_SUCCESS;
}
