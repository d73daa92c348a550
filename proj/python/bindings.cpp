#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lhvswap/analytic.hpp"
#include "lhvswap/oracle.hpp"
#include "lhvswap/runner.hpp"

namespace py = pybind11;
using namespace lhvswap;
using namespace lhvswap::analytic;
using namespace lhvswap::runner;

namespace {

using Angles = std::pair<double, double>;

UnitVec3 vec(const Angles& deg) { return UnitVec3::from_angles_deg(deg.first, deg.second); }

BellOutcome outcome_from(const std::string& name) {
  const auto k = parse_bell_outcome(name);
  if (!k || *k == BellOutcome::NoResult) throw py::value_error("unknown Bell outcome: " + name);
  return *k;
}

oracle::SphereGrid grid_of(std::size_t n) { return oracle::SphereGrid(n, n); }

std::string run_text(const std::string& config_json, const std::string& format) {
  const ScenarioConfig config = apply_json_config(config_json);
  std::ostringstream out;
  write_run(out, cmd_run(config), parse_format(format));
  return out.str();
}

std::string angle_sweep_text(const std::string& config_json, const std::string& format) {
  const ScenarioConfig config = apply_json_config(config_json);
  std::ostringstream out;
  write_angle_sweep(out, cmd_angle_sweep(config), parse_format(format));
  return out.str();
}

}  // namespace

PYBIND11_MODULE(_lhvswap, m) {
  m.doc() = "Local hidden-variable models of Bell tests and entanglement swapping";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("singlet_correlation",
        [](const Angles& a, const Angles& b) { return singlet_correlation(vec(a), vec(b)); },
        py::arg("a"), py::arg("b"));
  m.def("partial_swap_singlet_prob", &partial_swap_singlet_prob, py::arg("eta"));
  m.def("partial_swap_full_coincidence_prob", &partial_swap_full_coincidence_prob, py::arg("eta"));
  m.def("partial_swap_correlation",
        [](const Angles& a, const Angles& b, double eta) {
          return partial_swap_correlation(vec(a), vec(b), eta);
        },
        py::arg("a"), py::arg("b"), py::arg("eta"));
  m.def("partial_swap_visibility", &partial_swap_visibility, py::arg("eta"));
  m.def("quantum_outcome_correlation",
        [](const std::string& outcome, const Angles& a, const Angles& b) {
          return quantum_outcome_correlation(outcome_from(outcome), vec(a), vec(b));
        },
        py::arg("outcome"), py::arg("a"), py::arg("b"));

  m.def("oracle_bell_result_prob",
        [](double limit, std::size_t grid) { return oracle::oracle_bell_result_prob(limit, grid_of(grid)); },
        py::arg("limit"), py::arg("grid") = 200);
  m.def("oracle_limit_for_result_prob",
        [](double target, std::size_t grid) {
          return oracle::oracle_limit_for_result_prob(target, grid_of(grid));
        },
        py::arg("target"), py::arg("grid") = 200);
  m.def("oracle_fidelity_curve",
        [](const std::vector<double>& limits, std::size_t grid) {
          return oracle::oracle_fidelity_curve(limits, grid_of(grid));
        },
        py::arg("limits"), py::arg("grid") = 100);
  m.def("oracle_complete_swap_correlation",
        [](double limit, const std::string& outcome, const Angles& a, const Angles& b, std::size_t grid) {
          return oracle::oracle_complete_swap_correlation(limit, outcome_from(outcome), vec(a), vec(b),
                                                          grid_of(grid));
        },
        py::arg("limit"), py::arg("outcome"), py::arg("a"), py::arg("b"), py::arg("grid") = 60);

  m.def("run", &run_text, py::arg("config_json"), py::arg("format") = "csv",
        "Run a scenario described by a JSON config and return the formatted table.");
  m.def("angle_sweep", &angle_sweep_text, py::arg("config_json"), py::arg("format") = "csv");

  m.def("sweep_limit",
        [](const std::vector<double>& limits, std::uint64_t samples, std::uint64_t seed, std::size_t shards) {
          py::list out;
          for (const LimitCurveRow& r : cmd_sweep_limit(limits, samples, seed, shards)) {
            py::dict d;
            d["limit"] = r.limit;
            d["n_trials"] = r.n_trials;
            d["p_result"] = r.p_result;
            d["std_error"] = r.std_error;
            out.append(d);
          }
          return out;
        },
        py::arg("limits"), py::arg("samples"), py::arg("seed") = 1, py::arg("shards") = 4);
  m.def("fidelity_curve",
        [](const std::vector<double>& limits, std::uint64_t samples, std::uint64_t seed, std::size_t shards) {
          py::list out;
          for (const FidelityRow& r : cmd_fidelity_curve(limits, samples, seed, shards)) {
            py::dict d;
            d["limit"] = r.limit;
            d["p_result"] = r.p_result;
            d["fidelity"] = r.fidelity;
            d["std_error"] = r.std_error;
            out.append(d);
          }
          return out;
        },
        py::arg("limits"), py::arg("samples"), py::arg("seed") = 1, py::arg("shards") = 4);
  m.def("verify",
        [](std::uint64_t samples, std::uint64_t seed, std::size_t shards, std::size_t oracle_grid,
           double oracle_tolerance) {
          VerifyOptions opt;
          opt.n_trials = samples;
          opt.seed = seed;
          opt.n_shards = shards;
          opt.oracle_grid = oracle_grid;
          opt.oracle_tolerance = oracle_tolerance;
          py::list out;
          for (const VerifyRow& r : cmd_verify(opt)) {
            py::dict d;
            d["quantity"] = r.quantity;
            d["analytic"] = r.analytic;
            d["monte_carlo"] = r.monte_carlo;
            d["oracle"] = r.oracle ? py::object(py::float_(*r.oracle)) : py::object(py::none());
            d["abs_diff"] = r.abs_diff;
            d["sigma"] = r.sigma;
            d["pass"] = r.pass;
            out.append(d);
          }
          return out;
        },
        py::arg("samples") = 100000, py::arg("seed") = 20240101, py::arg("shards") = 4,
        py::arg("oracle_grid") = 40, py::arg("oracle_tolerance") = 1e-2);
}
