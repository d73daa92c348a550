#include "lhvswap/runner.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "lhvswap/analytic.hpp"
#include "lhvswap/angles.hpp"

namespace lhvswap::runner {

using nlohmann::json;

namespace {

std::string num(double v) { return fmt::format("{:.10g}", v == 0.0 ? 0.0 : v); }

std::string trim(std::string_view text) {
  const auto begin = text.find_first_not_of(" \t");
  if (begin == std::string_view::npos) return {};
  const auto end = text.find_last_not_of(" \t");
  return std::string(text.substr(begin, end - begin + 1));
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(trim(text.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_double(std::string_view field, const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw ConfigError(std::string(field), "expected a number, got '" + text + "'");
  }
  return value;
}

void require_unit_interval(std::string_view field, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw ConfigError(std::string(field), "must lie in [0, 1], got " + num(value));
  }
}

// Runs `body(i)` for i in [0, n) on up to hardware_concurrency threads.
template <typename Body>
void parallel_indices(std::size_t n, Body body) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) body(i);
  };
  const std::size_t n_threads =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

std::uint64_t shard_trial_count(std::uint64_t n_trials, std::size_t shard, std::size_t n_shards) {
  return n_trials > shard ? (n_trials - shard - 1) / n_shards + 1 : 0;
}

// Number of sorted limits strictly below -min_product, i.e. the limits that
// accept a pair with this minimum.
std::size_t accepted_limits(const std::vector<double>& sorted_limits, double min_product) {
  return static_cast<std::size_t>(
      std::lower_bound(sorted_limits.begin(), sorted_limits.end(), -min_product) -
      sorted_limits.begin());
}

std::size_t sorted_position(const std::vector<double>& sorted_limits, double limit) {
  return static_cast<std::size_t>(
      std::lower_bound(sorted_limits.begin(), sorted_limits.end(), limit) - sorted_limits.begin());
}

void check_curve_args(std::span<const double> limits, std::uint64_t n_trials,
                      std::size_t n_shards) {
  if (limits.empty()) throw ConfigError("limits", "at least one limit is required");
  for (const double l : limits) require_unit_interval("limits", l);
  if (n_trials == 0) throw ConfigError("samples", "must be at least 1");
  if (n_shards == 0) throw ConfigError("shards", "must be at least 1");
}

const std::array<UnitVec3, 3> kAxes = {UnitVec3::from_unit(1, 0, 0), UnitVec3::from_unit(0, 1, 0),
                                       UnitVec3::from_unit(0, 0, 1)};
constexpr std::array<char, 3> kAxisNames = {'x', 'y', 'z'};

std::vector<FrameSetting> axis_frame_settings() {
  std::vector<FrameSetting> settings;
  for (std::size_t i = 0; i < kAxes.size(); ++i) settings.push_back({i, kAxes[i], kAxes[i]});
  return settings;
}

std::string fits_path(const std::string& path) {
  constexpr std::string_view kExt = ".csv";
  if (path.size() > kExt.size() && path.compare(path.size() - kExt.size(), kExt.size(), kExt) == 0) {
    return path.substr(0, path.size() - kExt.size()) + ".fits.csv";
  }
  return path + ".fits.csv";
}

}  // namespace

std::string_view to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::Singlet: return "singlet";
    case Scenario::PartialSwap: return "partial_swap";
    case Scenario::CompleteSwap: return "complete_swap";
  }
  return "unknown";
}

std::string_view to_string(SweepPlane plane) {
  switch (plane) {
    case SweepPlane::XZ: return "xz";
    case SweepPlane::XY: return "xy";
    case SweepPlane::YZ: return "yz";
  }
  return "unknown";
}

Scenario parse_scenario(std::string_view text) {
  for (auto s : {Scenario::Singlet, Scenario::PartialSwap, Scenario::CompleteSwap}) {
    if (to_string(s) == text) return s;
  }
  throw ConfigError("scenario", "expected singlet, partial_swap or complete_swap, got '" +
                                    std::string(text) + "'");
}

OutputFormat parse_format(std::string_view text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "json") return OutputFormat::Json;
  throw ConfigError("format", "expected csv or json, got '" + std::string(text) + "'");
}

std::vector<double> BobSweep::angles_deg() const {
  const double span = stop_deg - start_deg;
  const auto n = static_cast<std::size_t>(std::llround(span / step_deg));
  std::vector<double> angles;
  angles.reserve(n);
  for (std::size_t i = 0; i < n; ++i) angles.push_back(start_deg + static_cast<double>(i) * step_deg);
  return angles;
}

UnitVec3 BobSweep::direction(double angle_deg) const {
  const auto [s, c] = sincos_deg(angle_deg);
  switch (plane) {
    case SweepPlane::XZ: return UnitVec3::from_unit(s, 0.0, c);
    case SweepPlane::XY: return UnitVec3::from_unit(c, s, 0.0);
    case SweepPlane::YZ: return UnitVec3::from_unit(0.0, s, c);
  }
  return UnitVec3{};
}

AngleSetting parse_angle_setting(std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) {
    throw ConfigError("alice/bob", "expected \"theta,phi\" in degrees, got '" + std::string(text) + "'");
  }
  return {parse_double("theta", parts[0]), parse_double("phi", parts[1])};
}

BobSweep parse_bob_sweep(std::string_view text) {
  BobSweep sweep;
  for (const std::string& item : split(text, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("bob_sweep", "expected key=value, got '" + item + "'");
    }
    const std::string key = trim(std::string_view(item).substr(0, eq));
    const std::string value = trim(std::string_view(item).substr(eq + 1));
    if (key == "plane") {
      if (value == "xz") {
        sweep.plane = SweepPlane::XZ;
      } else if (value == "xy") {
        sweep.plane = SweepPlane::XY;
      } else if (value == "yz") {
        sweep.plane = SweepPlane::YZ;
      } else {
        throw ConfigError("bob_sweep.plane", "expected xz, xy or yz, got '" + value + "'");
      }
    } else if (key == "start") {
      sweep.start_deg = parse_double("bob_sweep.start", value);
    } else if (key == "stop") {
      sweep.stop_deg = parse_double("bob_sweep.stop", value);
    } else if (key == "step") {
      sweep.step_deg = parse_double("bob_sweep.step", value);
    } else {
      throw ConfigError("bob_sweep", "unknown key '" + key + "'");
    }
  }
  return sweep;
}

std::vector<double> parse_limits(std::string_view text) {
  std::vector<double> limits;
  if (text.find(':') != std::string_view::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw ConfigError("limits", "expected start:stop:step");
    const double start = parse_double("limits", parts[0]);
    const double stop = parse_double("limits", parts[1]);
    const double step = parse_double("limits", parts[2]);
    if (!(step > 0.0) || stop < start) throw ConfigError("limits", "empty or reversed range");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) {
      // Round to 12 digits so 0.1 steps print as 0.3, not 0.30000000000000004.
      const double v = start + static_cast<double>(i) * step;
      limits.push_back(std::round(v * 1e12) / 1e12);
    }
  } else {
    for (const std::string& item : split(text, ',')) limits.push_back(parse_double("limits", item));
  }
  for (const double l : limits) require_unit_interval("limits", l);
  return limits;
}

void ScenarioConfig::validate() const {
  require_unit_interval("eta", eta);
  require_unit_interval("limit", limit);
  if (n_trials == 0) throw ConfigError("samples", "must be at least 1");
  if (n_shards == 0) throw ConfigError("shards", "must be at least 1");
  if (!std::isfinite(alice.theta_deg) || !std::isfinite(alice.phi_deg)) {
    throw ConfigError("alice", "angles must be finite");
  }
  if (bob_sweep && !bob_settings.empty()) {
    throw ConfigError("bob", "give either explicit Bob settings or a sweep, not both");
  }
  if (bob_sweep) {
    const BobSweep& s = *bob_sweep;
    if (!(s.step_deg > 0.0)) throw ConfigError("bob_sweep.step", "must be positive");
    if (!(s.stop_deg > s.start_deg)) throw ConfigError("bob_sweep.stop", "must exceed start");
    const double ratio = (s.stop_deg - s.start_deg) / s.step_deg;
    if (std::abs(ratio - std::round(ratio)) > 1e-9) {
      throw ConfigError("bob_sweep.step", "must divide the span stop - start");
    }
  }
  for (const double l : limits) require_unit_interval("limits", l);
}

ModelParams ScenarioConfig::model() const {
  switch (scenario) {
    case Scenario::Singlet: return SingletParams{};
    case Scenario::PartialSwap: return PartialSwapParams(eta);
    case Scenario::CompleteSwap: return CompleteSwapParams(limit);
  }
  return SingletParams{};
}

namespace {

AngleSetting angle_from_json(std::string_view field, const json& value) {
  if (value.is_string()) return parse_angle_setting(value.get<std::string>());
  if (value.is_array() && value.size() == 2 && value[0].is_number() && value[1].is_number()) {
    return {value[0].get<double>(), value[1].get<double>()};
  }
  throw ConfigError(std::string(field), "expected \"theta,phi\" or [theta, phi]");
}

}  // namespace

ScenarioConfig apply_json_config(const std::string& json_text, ScenarioConfig base) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config", "top level must be an object");
  if (doc.contains("bob") && doc.contains("bob_sweep")) {
    throw ConfigError("bob", "give either explicit Bob settings or a sweep, not both");
  }
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "scenario") {
        base.scenario = parse_scenario(value.get<std::string>());
      } else if (key == "eta") {
        base.eta = value.get<double>();
      } else if (key == "limit") {
        base.limit = value.get<double>();
      } else if (key == "samples") {
        base.n_trials = value.get<std::uint64_t>();
      } else if (key == "seed") {
        base.seed = value.get<std::uint64_t>();
      } else if (key == "shards") {
        base.n_shards = value.get<std::size_t>();
      } else if (key == "alice") {
        base.alice = angle_from_json("alice", value);
      } else if (key == "bob") {
        base.bob_settings.clear();
        base.bob_sweep.reset();
        for (const auto& item : value) base.bob_settings.push_back(angle_from_json("bob", item));
      } else if (key == "bob_sweep") {
        base.bob_settings.clear();
        if (value.is_string()) {
          base.bob_sweep = parse_bob_sweep(value.get<std::string>());
        } else {
          std::string text;
          for (const auto& [k, v] : value.items()) {
            if (!text.empty()) text += ',';
            text += k + "=" + (v.is_string() ? v.get<std::string>() : v.dump());
          }
          base.bob_sweep = parse_bob_sweep(text);
        }
      } else if (key == "limits") {
        if (value.is_string()) {
          base.limits = parse_limits(value.get<std::string>());
        } else {
          base.limits = value.get<std::vector<double>>();
        }
      } else if (key == "out") {
        base.output_path = value.get<std::string>();
      } else if (key == "format") {
        base.output_format = parse_format(value.get<std::string>());
      } else {
        throw ConfigError(key, "unknown configuration key");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError("config", std::string("wrong value type: ") + e.what());
  }
  return base;
}

ScenarioConfig load_config_file(const std::string& path, ScenarioConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return apply_json_config(buffer.str(), std::move(base));
}

std::vector<Setting> expand_settings(const ScenarioConfig& config) {
  const UnitVec3 alice = config.alice.direction();
  std::vector<Setting> settings;
  if (config.bob_sweep) {
    for (const double angle : config.bob_sweep->angles_deg()) {
      const UnitVec3 bob = config.bob_sweep->direction(angle);
      settings.push_back({config.alice, AngleSetting{bob.theta_deg(), bob.phi_deg()}, alice, bob, angle});
    }
  } else if (!config.bob_settings.empty()) {
    for (const AngleSetting& b : config.bob_settings) {
      settings.push_back({config.alice, b, alice, b.direction(), std::nullopt});
    }
  } else {
    settings.push_back({config.alice, config.alice, alice, alice, std::nullopt});
  }
  return settings;
}

AggregateCounts simulate(const ModelParams& model, std::span<const Setting> settings,
                         std::uint64_t n_trials, std::uint64_t seed, std::size_t n_shards) {
  if (settings.empty()) throw ConfigError("bob", "no settings to simulate");
  if (n_trials == 0) throw ConfigError("samples", "must be at least 1");
  if (n_shards == 0) throw ConfigError("shards", "must be at least 1");
  std::vector<AggregateCounts> shards(n_shards, AggregateCounts(settings.size()));
  parallel_indices(n_shards, [&](std::size_t shard) {
    RandomStream stream(seed, shard);
    const std::uint64_t count = shard_trial_count(n_trials, shard, n_shards);
    AggregateCounts& agg = shards[shard];
    for (std::size_t s = 0; s < settings.size(); ++s) {
      for (std::uint64_t t = 0; t < count; ++t) {
        agg.add(run_trial(model, settings[s].alice, settings[s].bob, stream, s));
      }
    }
  });
  AggregateCounts total(settings.size());
  for (const AggregateCounts& shard : shards) total += shard;
  return total;
}

RunResult cmd_run(const ScenarioConfig& config) {
  config.validate();
  std::vector<Setting> settings = expand_settings(config);
  AggregateCounts counts =
      simulate(config.model(), settings, config.n_trials, config.seed, config.n_shards);
  RunResult result{config, std::move(settings), std::move(counts)};
  if (!config.output_path.empty()) {
    std::ofstream out = open_output(config.output_path);
    write_run(out, result, config.output_format);
  }
  return result;
}

void write_run(std::ostream& out, const RunResult& result, OutputFormat format) {
  struct Row {
    std::size_t setting_id;
    BellOutcome outcome;
    std::uint64_t n_events;
    const CellCounts* cell;
  };
  std::vector<Row> rows;
  for (std::size_t s = 0; s < result.settings.size(); ++s) {
    std::uint64_t events = 0;
    for (const BellOutcome k : kBellStates) {
      const CellCounts& c = result.counts.cell(s, k);
      events += c.events();
      if (c.events() > 0) rows.push_back({s, k, c.events(), &c});
    }
    rows.push_back({s, BellOutcome::NoResult, result.counts.setting_trials(s) - events, nullptr});
  }

  if (format == OutputFormat::Csv) {
    out << "setting_id,alice_theta_deg,alice_phi_deg,bob_theta_deg,bob_phi_deg,bell_outcome,"
           "n_trials,n_events,n_coinc,n_pp,n_pm,n_mp,n_mm,n_alice_nodetect,p_pp,p_pm,p_mp,p_mm,E,"
           "E_stderr\n";
    for (const Row& r : rows) {
      const Setting& s = result.settings[r.setting_id];
      out << fmt::format("{},{},{},{},{},{},{},{},", r.setting_id, num(s.alice_deg.theta_deg),
                         num(s.alice_deg.phi_deg), num(s.bob_deg.theta_deg), num(s.bob_deg.phi_deg),
                         to_string(r.outcome), result.counts.setting_trials(r.setting_id),
                         r.n_events);
      if (r.cell == nullptr) {
        out << "0,0,0,0,0,0,,,,,,\n";
        continue;
      }
      const CellCounts& c = *r.cell;
      out << fmt::format("{},{},{},{},{},{},", c.coincidences(), c.n_pp, c.n_pm, c.n_mp, c.n_mm,
                         c.n_alice_nodetect);
      if (c.coincidences() == 0) {
        out << ",,,,,\n";
        continue;
      }
      const auto p = joint_probabilities(c);
      const auto e = correlation(c);
      out << fmt::format("{},{},{},{},{},{}\n", num(p[0]), num(p[1]), num(p[2]), num(p[3]),
                         num(e.value), num(e.std_error));
    }
    return;
  }

  const ScenarioConfig& cfg = result.config;
  json doc;
  doc["scenario"] = std::string(to_string(cfg.scenario));
  if (cfg.scenario == Scenario::PartialSwap) doc["eta"] = cfg.eta;
  if (cfg.scenario == Scenario::CompleteSwap) doc["limit"] = cfg.limit;
  doc["samples"] = cfg.n_trials;
  doc["seed"] = cfg.seed;
  doc["shards"] = cfg.n_shards;
  doc["n_trials"] = result.counts.n_trials();
  doc["n_bell_result"] = result.counts.n_bell_result();
  json jrows = json::array();
  for (const Row& r : rows) {
    const Setting& s = result.settings[r.setting_id];
    json row = {{"setting_id", r.setting_id},
                {"alice", {s.alice_deg.theta_deg, s.alice_deg.phi_deg}},
                {"bob", {s.bob_deg.theta_deg, s.bob_deg.phi_deg}},
                {"bell_outcome", std::string(to_string(r.outcome))},
                {"n_trials", result.counts.setting_trials(r.setting_id)},
                {"n_events", r.n_events}};
    if (r.cell != nullptr) {
      const CellCounts& c = *r.cell;
      row["counts"] = {{"pp", c.n_pp}, {"pm", c.n_pm}, {"mp", c.n_mp}, {"mm", c.n_mm},
                       {"alice_nodetect", c.n_alice_nodetect}};
      row["n_coinc"] = c.coincidences();
      if (c.coincidences() > 0) {
        const auto p = joint_probabilities(c);
        const auto e = correlation(c);
        row["joint"] = {p[0], p[1], p[2], p[3]};
        row["E"] = e.value;
        row["E_stderr"] = e.std_error;
      }
    }
    jrows.push_back(std::move(row));
  }
  doc["rows"] = std::move(jrows);
  out << doc.dump(2) << "\n";
}

std::vector<LimitCurveRow> cmd_sweep_limit(std::span<const double> limits, std::uint64_t n_trials,
                                           std::uint64_t seed, std::size_t n_shards) {
  check_curve_args(limits, n_trials, n_shards);
  std::vector<double> sorted(limits.begin(), limits.end());
  std::sort(sorted.begin(), sorted.end());

  // bins[j]: trials accepted for exactly the sorted limits 0..j.
  std::vector<std::vector<std::uint64_t>> shard_bins(n_shards,
                                                     std::vector<std::uint64_t>(sorted.size(), 0));
  parallel_indices(n_shards, [&](std::size_t shard) {
    RandomStream stream(seed, shard);
    auto& bins = shard_bins[shard];
    const std::uint64_t count = shard_trial_count(n_trials, shard, n_shards);
    for (std::uint64_t t = 0; t < count; ++t) {
      const UnitVec3 lambda1 = sample_uniform(stream);
      const UnitVec3 lambda4 = -sample_uniform(stream);
      const std::size_t accepted = accepted_limits(sorted, score_bell(lambda1, lambda4).min_product);
      if (accepted > 0) ++bins[accepted - 1];
    }
  });

  std::vector<std::uint64_t> accepted_at(sorted.size(), 0);
  std::uint64_t running = 0;
  for (std::size_t j = sorted.size(); j-- > 0;) {
    for (const auto& bins : shard_bins) running += bins[j];
    accepted_at[j] = running;
  }
  std::vector<LimitCurveRow> rows;
  for (const double l : limits) {
    const Estimate p = binomial_fraction(accepted_at[sorted_position(sorted, l)], n_trials);
    rows.push_back({l, n_trials, p.value, p.std_error});
  }
  return rows;
}

void write_limit_curve(std::ostream& out, std::span<const LimitCurveRow> rows, OutputFormat format) {
  if (format == OutputFormat::Csv) {
    out << "limit,n_trials,p_result,stderr\n";
    for (const auto& r : rows) {
      out << fmt::format("{},{},{},{}\n", num(r.limit), r.n_trials, num(r.p_result), num(r.std_error));
    }
    return;
  }
  json doc = json::array();
  for (const auto& r : rows) {
    doc.push_back({{"limit", r.limit}, {"n_trials", r.n_trials}, {"p_result", r.p_result},
                   {"stderr", r.std_error}});
  }
  out << doc.dump(2) << "\n";
}

std::vector<FidelityRow> cmd_fidelity_curve(std::span<const double> limits, std::uint64_t n_trials,
                                            std::uint64_t seed, std::size_t n_shards) {
  check_curve_args(limits, n_trials, n_shards);
  std::vector<double> sorted(limits.begin(), limits.end());
  std::sort(sorted.begin(), sorted.end());

  std::vector<std::vector<AggregateCounts>> shard_bins(
      n_shards, std::vector<AggregateCounts>(sorted.size(), AggregateCounts(kAxes.size())));
  parallel_indices(n_shards, [&](std::size_t shard) {
    RandomStream stream(seed, shard);
    auto& bins = shard_bins[shard];
    const std::uint64_t count = shard_trial_count(n_trials, shard, n_shards);
    for (std::uint64_t t = 0; t < count; ++t) {
      const std::uint64_t global_index = shard + t * n_shards;
      const std::size_t axis = global_index % kAxes.size();
      const UnitVec3 lambda1 = sample_uniform(stream);
      const UnitVec3 lambda4 = -sample_uniform(stream);
      const BellScore score = score_bell(lambda1, lambda4);
      const std::size_t accepted = accepted_limits(sorted, score.min_product);
      if (accepted == 0) continue;
      const TrialRecord record{score.branch, alice_response(kAxes[axis], lambda1, stream.uniform()),
                               bob_response(kAxes[axis], lambda4), axis};
      bins[accepted - 1].add(record);
    }
  });

  std::vector<AggregateCounts> at_limit(sorted.size(), AggregateCounts(kAxes.size()));
  AggregateCounts running(kAxes.size());
  for (std::size_t j = sorted.size(); j-- > 0;) {
    for (const auto& bins : shard_bins) running += bins[j];
    at_limit[j] = running;
  }
  const std::vector<FrameSetting> frames = axis_frame_settings();
  std::vector<FidelityRow> rows;
  for (const double l : limits) {
    const AggregateCounts& agg = at_limit[sorted_position(sorted, l)];
    const Estimate p = binomial_fraction(agg.n_bell_result(), n_trials);
    Estimate f;
    try {
      f = pooled_fidelity(agg, frames);
    } catch (const EmptyCellError&) {
      throw EmptyCellError("no accepted coincidences at limit " + num(l));
    }
    rows.push_back({l, p.value, f.value, f.std_error});
  }
  return rows;
}

void write_fidelity_curve(std::ostream& out, std::span<const FidelityRow> rows,
                          OutputFormat format) {
  if (format == OutputFormat::Csv) {
    out << "limit,p_result,fidelity,stderr\n";
    for (const auto& r : rows) {
      out << fmt::format("{},{},{},{}\n", num(r.limit), num(r.p_result), num(r.fidelity),
                         num(r.std_error));
    }
    return;
  }
  json doc = json::array();
  for (const auto& r : rows) {
    doc.push_back({{"limit", r.limit}, {"p_result", r.p_result}, {"fidelity", r.fidelity},
                   {"stderr", r.std_error}});
  }
  out << doc.dump(2) << "\n";
}

const CurveFit& AngleSweepResult::fit(BellOutcome outcome, std::string_view curve) const {
  for (const CurveFit& f : fits) {
    if (f.outcome == outcome && f.curve == curve) return f;
  }
  throw std::out_of_range("no fit for " + std::string(to_string(outcome)) + "/" + std::string(curve));
}

AngleSweepResult cmd_angle_sweep(const ScenarioConfig& config) {
  config.validate();
  if (!config.bob_sweep) throw ConfigError("bob_sweep", "angle-sweep needs a Bob sweep");
  if (config.bob_sweep->angles_deg().size() < 8) {
    throw ConfigError("bob_sweep", "angle-sweep needs at least 8 points");
  }
  AngleSweepResult result;
  {
    std::vector<Setting> settings = expand_settings(config);
    AggregateCounts counts =
        simulate(config.model(), settings, config.n_trials, config.seed, config.n_shards);
    result.run = RunResult{config, std::move(settings), std::move(counts)};
  }
  const RunResult& run = result.run;

  for (const BellOutcome k : kBellStates) {
    if (run.counts.outcome_events(k) == 0) continue;
    std::array<std::vector<AngleSample>, kSweepCurves.size()> curves;
    for (std::size_t s = 0; s < run.settings.size(); ++s) {
      const CellCounts& c = run.counts.cell(s, k);
      SweepRow row;
      row.angle_deg = *run.settings[s].sweep_angle_deg;
      row.outcome = k;
      row.n_coinc = c.coincidences();
      if (row.n_coinc > 0) {
        row.joint = joint_probabilities(c);
        const CorrelationEstimate e = correlation(c);
        row.correlation = e.value;
        row.std_error = e.std_error;
        const double n = static_cast<double>(row.n_coinc);
        const double theta = deg_to_rad(row.angle_deg);
        // Points with zero binomial variance get a 1/n floor so the fit stays weighted.
        curves[0].push_back({theta, e.value, std::max(e.std_error, 1.0 / n)});
        for (std::size_t q = 0; q < 4; ++q) {
          const double p = row.joint[q];
          curves[q + 1].push_back({theta, p, std::max(std::sqrt(p * (1.0 - p) / n), 1.0 / n)});
        }
      } else {
        row.joint.fill(std::nan(""));
        row.correlation = std::nan("");
        row.std_error = std::nan("");
      }
      result.rows.push_back(row);
    }
    for (std::size_t ci = 0; ci < kSweepCurves.size(); ++ci) {
      CurveFit cf{k, std::string(kSweepCurves[ci]), std::nullopt, {}};
      try {
        cf.fit = fit_sinusoid(curves[ci]);
      } catch (const RankDeficientError& e) {
        cf.error = e.what();
      }
      result.fits.push_back(std::move(cf));
    }
  }
  // Rows grouped by angle, then outcome.
  std::stable_sort(result.rows.begin(), result.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.angle_deg < b.angle_deg;
  });

  if (!config.output_path.empty()) {
    std::ofstream out = open_output(config.output_path);
    write_angle_sweep(out, result, config.output_format);
    if (config.output_format == OutputFormat::Csv) {
      std::ofstream fits = open_output(fits_path(config.output_path));
      write_sweep_fits(fits, result);
    }
  }
  return result;
}

namespace {

json fit_to_json(const CurveFit& f) {
  json j = {{"bell_outcome", std::string(to_string(f.outcome))}, {"curve", f.curve}};
  if (!f.fit) {
    j["error"] = f.error;
    return j;
  }
  const SinusoidFit& s = *f.fit;
  j["offset"] = s.c_offset;
  j["a_cos"] = s.a_cos;
  j["b_sin"] = s.b_sin;
  j["amplitude"] = s.amplitude;
  j["phase_deg"] = rad_to_deg(s.phase);
  j["rms_residual"] = s.rms_residual;
  j["offset_stderr"] = s.offset_stderr;
  j["amplitude_stderr"] = s.amplitude_stderr;
  j["chi2"] = s.chi2;
  j["dof"] = s.dof;
  return j;
}

std::string csv_num(double v) { return std::isnan(v) ? std::string() : num(v); }

}  // namespace

void write_angle_sweep(std::ostream& out, const AngleSweepResult& result, OutputFormat format) {
  if (format == OutputFormat::Csv) {
    out << "angle_deg,bell_outcome,n_coinc,p_pp,p_pm,p_mp,p_mm,E,E_stderr\n";
    for (const SweepRow& r : result.rows) {
      out << fmt::format("{},{},{},{},{},{},{},{},{}\n", num(r.angle_deg), to_string(r.outcome),
                         r.n_coinc, csv_num(r.joint[0]), csv_num(r.joint[1]), csv_num(r.joint[2]),
                         csv_num(r.joint[3]), csv_num(r.correlation), csv_num(r.std_error));
    }
    return;
  }
  const ScenarioConfig& cfg = result.run.config;
  json doc;
  doc["scenario"] = std::string(to_string(cfg.scenario));
  if (cfg.scenario == Scenario::PartialSwap) doc["eta"] = cfg.eta;
  if (cfg.scenario == Scenario::CompleteSwap) doc["limit"] = cfg.limit;
  doc["samples"] = cfg.n_trials;
  doc["seed"] = cfg.seed;
  doc["shards"] = cfg.n_shards;
  doc["alice"] = {cfg.alice.theta_deg, cfg.alice.phi_deg};
  doc["plane"] = std::string(to_string(cfg.bob_sweep->plane));
  json rows = json::array();
  for (const SweepRow& r : result.rows) {
    json row = {{"angle_deg", r.angle_deg},
                {"bell_outcome", std::string(to_string(r.outcome))},
                {"n_coinc", r.n_coinc}};
    if (r.n_coinc > 0) {
      row["joint"] = {r.joint[0], r.joint[1], r.joint[2], r.joint[3]};
      row["E"] = r.correlation;
      row["E_stderr"] = r.std_error;
    }
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  json fits = json::array();
  for (const CurveFit& f : result.fits) fits.push_back(fit_to_json(f));
  doc["fits"] = std::move(fits);
  out << doc.dump(2) << "\n";
}

void write_sweep_fits(std::ostream& out, const AngleSweepResult& result) {
  out << "bell_outcome,curve,offset,a_cos,b_sin,amplitude,phase_deg,rms_residual,offset_stderr,"
         "amplitude_stderr,chi2,dof,error\n";
  for (const CurveFit& f : result.fits) {
    if (!f.fit) {
      out << fmt::format("{},{},,,,,,,,,,,\"{}\"\n", to_string(f.outcome), f.curve, f.error);
      continue;
    }
    const SinusoidFit& s = *f.fit;
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},\n", to_string(f.outcome), f.curve,
                       num(s.c_offset), num(s.a_cos), num(s.b_sin), num(s.amplitude),
                       num(rad_to_deg(s.phase)), num(s.rms_residual), num(s.offset_stderr),
                       num(s.amplitude_stderr), num(s.chi2), s.dof);
  }
}

std::vector<PartialSwapPair> partial_swap_reference_pairs() {
  return {
      {"parallel", UnitVec3::from_angles_deg(0, 0), UnitVec3::from_angles_deg(0, 0)},
      {"sixty", UnitVec3::from_angles_deg(0, 0), UnitVec3::from_angles_deg(60, 0)},
      {"orthogonal", UnitVec3::from_angles_deg(90, 0), UnitVec3::from_angles_deg(90, 90)},
      {"general", UnitVec3::from_angles_deg(35, 20), UnitVec3::from_angles_deg(80, 140)},
      {"obtuse", UnitVec3::from_angles_deg(120, 45), UnitVec3::from_angles_deg(30, 250)},
  };
}

namespace {

struct RowBuilder {
  std::vector<VerifyRow>& rows;

  // Passes when |mc - analytic| <= 4 sigma + bias and, if present,
  // |oracle - analytic| <= oracle_tolerance + bias.
  void add(std::string quantity, double analytic, Estimate mc, std::optional<double> oracle,
           double oracle_tolerance, double bias = 0.0) {
    VerifyRow row;
    row.quantity = std::move(quantity);
    row.analytic = analytic;
    row.monte_carlo = mc.value;
    row.oracle = oracle;
    row.abs_diff = std::abs(mc.value - analytic);
    row.sigma = mc.std_error;
    row.pass = row.abs_diff <= 4.0 * mc.std_error + bias + 1e-12;
    if (oracle) row.pass = row.pass && std::abs(*oracle - analytic) <= oracle_tolerance + bias;
    rows.push_back(std::move(row));
  }
};

std::vector<Setting> to_settings(std::span<const PartialSwapPair> pairs) {
  std::vector<Setting> settings;
  for (const auto& p : pairs) {
    settings.push_back({AngleSetting{p.alice.theta_deg(), p.alice.phi_deg()},
                        AngleSetting{p.bob.theta_deg(), p.bob.phi_deg()}, p.alice, p.bob,
                        std::nullopt});
  }
  return settings;
}

std::vector<Setting> chsh_settings() {
  const auto c = analytic::optimal_chsh_settings();
  const std::vector<PartialSwapPair> pairs = {
      {"ab", c.a, c.b}, {"ab'", c.a, c.b_prime}, {"a'b", c.a_prime, c.b}, {"a'b'", c.a_prime, c.b_prime}};
  return to_settings(pairs);
}

std::array<double, 4> chsh_analytic_inputs(double visibility) {
  const auto c = analytic::optimal_chsh_settings();
  return {visibility * analytic::singlet_correlation(c.a, c.b),
          visibility * analytic::singlet_correlation(c.a, c.b_prime),
          visibility * analytic::singlet_correlation(c.a_prime, c.b),
          visibility * analytic::singlet_correlation(c.a_prime, c.b_prime)};
}

// One coincidence of resolution; keeps sigma nonzero when every coincidence agrees.
double sigma_floor(double std_error, std::uint64_t n) {
  return n == 0 ? std_error : std::max(std_error, 1.0 / static_cast<double>(n));
}

Estimate as_estimate(const CorrelationEstimate& e) { return {e.value, sigma_floor(e.std_error, e.n_coinc)}; }

}  // namespace

std::vector<VerifyRow> cmd_verify(const VerifyOptions& options) {
  std::vector<VerifyRow> rows;
  RowBuilder out{rows};
  const double tol = options.oracle_tolerance;
  const oracle::SphereGrid grid(options.oracle_grid, options.oracle_grid);
  const std::vector<PartialSwapPair> pairs = partial_swap_reference_pairs();
  const std::vector<Setting> pair_settings = to_settings(pairs);
  const std::vector<Setting> chsh = chsh_settings();
  const std::array<std::size_t, 4> chsh_ids = {0, 1, 2, 3};
  std::uint64_t seed = options.seed;

  // Singlet model.
  {
    const AggregateCounts agg =
        simulate(SingletParams{}, pair_settings, options.n_trials, seed++, options.n_shards);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      out.add("E(a;b) singlet model pair=" + pairs[i].name,
              analytic::singlet_correlation(pairs[i].alice, pairs[i].bob),
              as_estimate(correlation(agg, i, BellOutcome::PsiMinus)), std::nullopt, tol);
    }
    const std::uint64_t events = agg.outcome_events(BellOutcome::PsiMinus);
    const Estimate alice = binomial_fraction(agg.outcome_coincidences(BellOutcome::PsiMinus), events);
    out.add("Alice detection rate (singlet model)", 0.5, alice, std::nullopt, tol);
    out.add("Bob detection rate (singlet model)", 1.0, binomial_fraction(events, agg.n_trials()),
            std::nullopt, tol);
    out.add("mean detection efficiency (singlet model)",
            analytic::thresholds::kMeanDetectionSingletModel,
            {(alice.value + 1.0) / 2.0, alice.std_error / 2.0}, std::nullopt, tol);
    out.add("visibility (singlet model)", 1.0,
            visibility(agg, BellOutcome::PsiMinus, std::array<std::size_t, 1>{0}), std::nullopt, tol);

    const AggregateCounts chsh_agg =
        simulate(SingletParams{}, chsh, options.n_trials, seed++, options.n_shards);
    const Estimate s = chsh_from_counts(chsh_agg, chsh_ids, BellOutcome::PsiMinus);
    out.add("conditional CHSH |S| (singlet model)",
            std::abs(analytic::chsh_value(chsh_analytic_inputs(1.0))), {std::abs(s.value), s.std_error},
            std::nullopt, tol);
  }

  // Partial Bell measurement.
  for (const double eta : kReferenceEtas) {
    const PartialSwapParams params(eta);
    const std::string tag = fmt::format(" eta={}", eta);
    const AggregateCounts agg =
        simulate(params, pair_settings, options.n_trials, seed++, options.n_shards);
    const oracle::PartialSwapValues first = oracle::oracle_partial_swap(eta, pairs[0].alice, pairs[0].bob, grid);
    out.add("P(singlet)" + tag, analytic::partial_swap_singlet_prob(eta),
            binomial_fraction(agg.outcome_events(BellOutcome::PsiMinus), agg.n_trials()),
            first.p_singlet, tol);
    out.add("P(singlet and Alice detected)" + tag, analytic::partial_swap_full_coincidence_prob(eta),
            binomial_fraction(agg.outcome_coincidences(BellOutcome::PsiMinus), agg.n_trials()),
            first.p_full, tol);
    out.add("P(Alice detected | singlet)" + tag, 0.5,
            binomial_fraction(agg.outcome_coincidences(BellOutcome::PsiMinus),
                              agg.outcome_events(BellOutcome::PsiMinus)),
            std::nullopt, tol);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto o = i == 0 ? first : oracle::oracle_partial_swap(eta, pairs[i].alice, pairs[i].bob, grid);
      out.add("E(a;b) partial swap" + tag + " pair=" + pairs[i].name,
              analytic::partial_swap_correlation(pairs[i].alice, pairs[i].bob, eta),
              as_estimate(correlation(agg, i, BellOutcome::PsiMinus)), o.correlation, tol);
    }
    const Estimate v = visibility(agg, BellOutcome::PsiMinus, std::array<std::size_t, 1>{0});
    out.add("visibility partial swap" + tag, analytic::partial_swap_visibility(eta),
            {v.value, sigma_floor(v.std_error, correlation(agg, 0, BellOutcome::PsiMinus).n_coinc)},
            first.correlation ? std::optional<double>(-*first.correlation) : std::nullopt, tol);
    if (eta == 1.0) {
      const AggregateCounts chsh_agg = simulate(params, chsh, options.n_trials, seed++, options.n_shards);
      const Estimate s = chsh_from_counts(chsh_agg, chsh_ids, BellOutcome::PsiMinus);
      out.add("conditional CHSH |S| partial swap" + tag,
              std::abs(analytic::chsh_value(chsh_analytic_inputs(analytic::partial_swap_visibility(eta)))),
              {std::abs(s.value), s.std_error}, std::nullopt, tol);
    }
  }

  // Complete Bell measurement.
  {
    const std::array<double, 2> limits = {0.0, 1.0};
    const std::vector<LimitCurveRow> curve =
        cmd_sweep_limit(limits, options.n_trials, seed++, options.n_shards);
    const std::vector<double> oracle_curve = oracle::oracle_bell_result_curve(limits, grid);
    out.add("P(result) complete swap limit=0", 1.0, {curve[0].p_result, curve[0].std_error},
            oracle_curve[0], tol);
    out.add("P(result) complete swap limit=1", 0.0, {curve[1].p_result, curve[1].std_error},
            oracle_curve[1], tol);

    // Near limit = 1 the accepted pairs satisfy lambda1 ~ -R_k lambda4, so each
    // branch approaches the ideal correlation up to a bias below 0.02.
    constexpr double kLimit = 0.99;
    constexpr double kBias = 0.02;
    const UnitVec3 z = UnitVec3::from_unit(0, 0, 1);
    const std::vector<Setting> zz = {{AngleSetting{}, AngleSetting{}, z, z, std::nullopt}};
    const AggregateCounts agg = simulate(CompleteSwapParams(kLimit), zz, options.n_trials * 5,
                                         seed++, options.n_shards);
    const std::array<double, 1> lim = {kLimit};
    const std::array<UnitVec3, 1> zs = {z};
    const oracle::CompleteSwapTable table = oracle::oracle_complete_swap(lim, zs, zs, grid);
    for (const BellOutcome k : kBellStates) {
      out.add(fmt::format("E(z;z) complete swap limit=0.99 outcome={} vs quantum (bias 0.02)", to_string(k)),
              analytic::quantum_outcome_correlation(k, z, z), as_estimate(correlation(agg, 0, k)),
              table.correlation(0, k, 0, 0), tol, kBias);
    }
  }
  return rows;
}

void write_verify(std::ostream& out, std::span<const VerifyRow> rows, OutputFormat format) {
  if (format == OutputFormat::Csv) {
    out << "quantity,analytic,monte_carlo,oracle,abs_diff,sigma,pass\n";
    for (const VerifyRow& r : rows) {
      out << fmt::format("{},{},{},{},{},{},{}\n", r.quantity, num(r.analytic), num(r.monte_carlo),
                         r.oracle ? num(*r.oracle) : std::string(), num(r.abs_diff), num(r.sigma),
                         r.pass ? "pass" : "fail");
    }
    return;
  }
  json doc = json::array();
  for (const VerifyRow& r : rows) {
    json row = {{"quantity", r.quantity}, {"analytic", r.analytic}, {"monte_carlo", r.monte_carlo},
                {"abs_diff", r.abs_diff}, {"sigma", r.sigma}, {"pass", r.pass}};
    row["oracle"] = r.oracle ? json(*r.oracle) : json(nullptr);
    doc.push_back(std::move(row));
  }
  out << doc.dump(2) << "\n";
}

std::vector<FigureSpec> figure_specs() {
  const BobSweep sweep{SweepPlane::XZ, 0.0, 360.0, 10.0};
  return {
      {"eff50", 0.5, AngleSetting{0.0, 0.0}, sweep},
      {"eff90", 0.9, AngleSetting{0.0, 0.0}, sweep},
  };
}

std::vector<double> reference_limits() {
  return {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99};
}

namespace fixture_keys {

std::string bell_result_prob(double limit) { return fmt::format("bell_result_prob limit={}", limit); }
std::string limit_for_result_prob(double target) {
  return fmt::format("limit_for_result_prob p={}", target);
}
std::string fidelity(double limit) { return fmt::format("fidelity limit={}", limit); }
std::string complete_swap_correlation(double limit, BellOutcome outcome, char axis) {
  return fmt::format("complete_swap_E limit={} outcome={} axis={}", limit, to_string(outcome), axis);
}
std::string figure_limit(std::string_view figure) { return fmt::format("{} limit", figure); }
std::string sweep_value(std::string_view figure, BellOutcome outcome, double angle_deg,
                        std::string_view curve) {
  return fmt::format("{} outcome={} angle={} {}", figure, to_string(outcome), angle_deg, curve);
}
std::string sweep_fit(std::string_view figure, BellOutcome outcome, std::string_view curve,
                      std::string_view field) {
  return fmt::format("{} fit outcome={} curve={} {}", figure, to_string(outcome), curve, field);
}
std::string partial_swap(std::string_view quantity, double eta, std::string_view pair) {
  return fmt::format("partial_swap {} eta={} pair={}", quantity, eta, pair);
}

}  // namespace fixture_keys

namespace {

using oracle::Fixture;
using oracle::SphereGrid;

void put(Fixture& fx, const std::string& key, double fine, double coarse) {
  fx[key] = oracle::FixtureEntry{fine, std::abs(fine - coarse)};
}

// Unit normal of the sweep plane and a lambda4 grid whose azimuth edges fall
// on every whole degree of the sweep, making Bob's sign exact.
SphereGrid sweep_bob_grid(const BobSweep& sweep, std::size_t n_z, std::size_t n_phi) {
  UnitVec3 normal;
  switch (sweep.plane) {
    case SweepPlane::XZ: normal = UnitVec3::from_unit(0, 1, 0); break;
    case SweepPlane::XY: normal = UnitVec3::from_unit(0, 0, 1); break;
    case SweepPlane::YZ: normal = UnitVec3::from_unit(1, 0, 0); break;
  }
  return SphereGrid(n_z, n_phi).oriented(normal);
}

std::array<double, 5> oracle_curve_values(const oracle::OracleCell& cell) {
  const auto p = cell.joint_probabilities();
  return {cell.correlation(), p[0], p[1], p[2], p[3]};
}

}  // namespace

oracle::Fixture cmd_oracle(const OracleOptions& options) {
  if (options.symmetric_grid < 4 || options.general_grid < 4) {
    throw ConfigError("grid", "grid sizes must be at least 4");
  }
  Fixture fx;
  const std::size_t ns = options.symmetric_grid;
  const std::size_t ng = options.general_grid;
  const SphereGrid sym_fine(ns, ns), sym_coarse(ns / 2, ns / 2);
  const SphereGrid gen_fine(ng, ng), gen_coarse(ng / 2, ng / 2);

  // Result probability versus limit.
  std::vector<double> limits = reference_limits();
  limits.push_back(1.0);
  {
    const auto fine = oracle::oracle_bell_result_curve(limits, sym_fine);
    const auto coarse = oracle::oracle_bell_result_curve(limits, sym_coarse);
    for (std::size_t i = 0; i < limits.size(); ++i) {
      put(fx, fixture_keys::bell_result_prob(limits[i]), fine[i], coarse[i]);
    }
  }

  // Limits giving the figure efficiencies.
  const std::vector<FigureSpec> figures = figure_specs();
  std::vector<double> figure_limits;
  for (const FigureSpec& f : figures) {
    const double fine = oracle::oracle_limit_for_result_prob(f.target_result_prob, gen_fine);
    const double coarse = oracle::oracle_limit_for_result_prob(f.target_result_prob, gen_coarse);
    put(fx, fixture_keys::limit_for_result_prob(f.target_result_prob), fine, coarse);
    put(fx, fixture_keys::figure_limit(f.name), fine, coarse);
    figure_limits.push_back(fine);
  }

  // Fidelity curve and per-branch parallel-axis correlations.
  {
    const std::vector<double> fid_limits = reference_limits();
    const std::array<UnitVec3, 3> axes = kAxes;
    const auto fine = oracle::oracle_complete_swap(fid_limits, axes, axes, gen_fine);
    const auto coarse = oracle::oracle_complete_swap(fid_limits, axes, axes, gen_coarse);
    const auto fid_fine = oracle::oracle_fidelity_curve(fid_limits, gen_fine);
    const auto fid_coarse = oracle::oracle_fidelity_curve(fid_limits, gen_coarse);
    for (std::size_t li = 0; li < fid_limits.size(); ++li) {
      put(fx, fixture_keys::fidelity(fid_limits[li]), fid_fine[li], fid_coarse[li]);
      for (const BellOutcome k : kBellStates) {
        for (std::size_t i = 0; i < axes.size(); ++i) {
          put(fx, fixture_keys::complete_swap_correlation(fid_limits[li], k, kAxisNames[i]),
              fine.correlation(li, k, i, i), coarse.correlation(li, k, i, i));
        }
      }
    }
  }

  // Angle sweeps at the figure efficiencies.
  for (std::size_t fi = 0; fi < figures.size(); ++fi) {
    const FigureSpec& f = figures[fi];
    const std::vector<double> angles = f.sweep.angles_deg();
    std::vector<UnitVec3> bobs;
    for (const double a : angles) bobs.push_back(f.sweep.direction(a));
    const std::array<UnitVec3, 1> alices = {f.alice.direction()};
    const std::array<double, 1> lim = {figure_limits[fi]};
    const auto fine = oracle::oracle_complete_swap(lim, alices, bobs, gen_fine,
                                                   sweep_bob_grid(f.sweep, ng, 360));
    const auto coarse = oracle::oracle_complete_swap(lim, alices, bobs, gen_coarse,
                                                     sweep_bob_grid(f.sweep, ng / 2, 180));
    put(fx, f.name + " result_prob", fine.result_prob(0), coarse.result_prob(0));
    for (const BellOutcome k : kBellStates) {
      std::array<std::vector<AngleSample>, kSweepCurves.size()> fine_curves, coarse_curves;
      for (std::size_t j = 0; j < angles.size(); ++j) {
        const auto vf = oracle_curve_values(fine.cell(0, k, 0, j));
        const auto vc = oracle_curve_values(coarse.cell(0, k, 0, j));
        for (std::size_t ci = 0; ci < kSweepCurves.size(); ++ci) {
          put(fx, fixture_keys::sweep_value(f.name, k, angles[j], kSweepCurves[ci]), vf[ci], vc[ci]);
          fine_curves[ci].push_back({deg_to_rad(angles[j]), vf[ci], 0.0});
          coarse_curves[ci].push_back({deg_to_rad(angles[j]), vc[ci], 0.0});
        }
      }
      for (std::size_t ci = 0; ci < kSweepCurves.size(); ++ci) {
        const SinusoidFit sf = fit_sinusoid(fine_curves[ci]);
        const SinusoidFit sc = fit_sinusoid(coarse_curves[ci]);
        const std::string_view curve = kSweepCurves[ci];
        put(fx, fixture_keys::sweep_fit(f.name, k, curve, "amplitude"), sf.amplitude, sc.amplitude);
        put(fx, fixture_keys::sweep_fit(f.name, k, curve, "offset"), sf.c_offset, sc.c_offset);
        put(fx, fixture_keys::sweep_fit(f.name, k, curve, "phase_deg"), rad_to_deg(sf.phase),
            rad_to_deg(sf.phase + std::remainder(sc.phase - sf.phase, 2.0 * std::numbers::pi)));
        put(fx, fixture_keys::sweep_fit(f.name, k, curve, "rms_residual"), sf.rms_residual,
            sc.rms_residual);
      }
    }
  }

  // Partial-swap closed forms.
  for (const double eta : kReferenceEtas) {
    put(fx, fixture_keys::partial_swap("P_singlet", eta, "any"),
        oracle::oracle_partial_swap_singlet_prob(eta, sym_fine),
        oracle::oracle_partial_swap_singlet_prob(eta, sym_coarse));
    for (const PartialSwapPair& p : partial_swap_reference_pairs()) {
      if (p.name != "parallel" && p.name != "general") continue;
      const auto fine = oracle::oracle_partial_swap(eta, p.alice, p.bob, gen_fine);
      const auto coarse = oracle::oracle_partial_swap(eta, p.alice, p.bob, gen_coarse);
      put(fx, fixture_keys::partial_swap("p_full", eta, p.name), fine.p_full, coarse.p_full);
      put(fx, fixture_keys::partial_swap("E", eta, p.name), *fine.correlation, *coarse.correlation);
    }
  }
  return fx;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace lhvswap::runner
