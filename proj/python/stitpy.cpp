// _stitpy: pybind11 bindings over stit_core. Vectors cross the boundary as
// Python lists; tessellations as the JSON documents written by the CLI.

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "stit/config.hpp"
#include "stit/error.hpp"
#include "stit/io.hpp"
#include "stit/measure.hpp"
#include "stit/mixing.hpp"
#include "stit/nesting.hpp"
#include "stit/simulator.hpp"
#include "stit/verify.hpp"

namespace py = pybind11;

namespace {

stit::HyperplaneMeasure discrete_measure(double gamma,
                                         const std::vector<std::pair<std::vector<double>, double>>& atoms) {
  std::vector<stit::DirectionalDistribution::Atom> out;
  out.reserve(atoms.size());
  for (const auto& [u, w] : atoms) {
    stit::Vec v(static_cast<Eigen::Index>(u.size()));
    for (std::size_t i = 0; i < u.size(); ++i) v[static_cast<Eigen::Index>(i)] = u[i];
    if (!(v.norm() > 0.0)) throw stit::DomainError("zero direction");
    out.push_back({stit::Direction::normalized(v), w});
  }
  return stit::HyperplaneMeasure(gamma, stit::DirectionalDistribution::discrete(std::move(out)));
}

struct Simulation {
  std::size_t cells;
  std::uint64_t jumps;
  double zeta;
  double zero_cell_volume;
  double edge_length;
  std::string tessellation_json;
  std::string snapshot_json;
};

Simulation run_simulation(const stit::HyperplaneMeasure& m, double half_side, double t,
                          std::uint64_t seed, std::uint64_t replicate) {
  stit::RandomStream rng(seed, replicate);
  const auto state = stit::simulate(m, stit::Window(half_side, m.dim()), t, rng);
  const auto tess = stit::to_tessellation(state);
  const auto summary = stit::summarize(tess);
  return Simulation{state.live_count(),          state.jump_count(),
                    state.zeta(),                summary.zero_cell_volume,
                    summary.edge_length,         stit::tessellation_json(tess),
                    stit::snapshot_json(state)};
}

py::dict check_to_dict(const stit::CheckResult& r) {
  py::dict d;
  d["name"] = r.name;
  d["kind"] = r.hard ? "hard" : "soft";
  d["status"] = stit::status_name(r.status);
  d["value"] = r.value;
  d["reference"] = r.reference;
  d["n"] = r.n;
  d["attempts"] = r.attempts;
  d["detail"] = r.detail;
  return d;
}

}  // namespace

PYBIND11_MODULE(_stitpy, mod) {
  mod.doc() = "STIT tessellation simulation and mixing-rate toolkit";

  py::register_exception<stit::DomainError>(mod, "DomainError", PyExc_ValueError);
  py::register_exception<stit::ConfigError>(mod, "ConfigError", PyExc_ValueError);
  py::register_exception<stit::AssumptionFailed>(mod, "AssumptionFailed", PyExc_ValueError);
  py::register_exception<stit::EstimationError>(mod, "EstimationError", PyExc_RuntimeError);

  py::class_<stit::HyperplaneMeasure>(mod, "Measure")
      .def_static("isotropic", &stit::HyperplaneMeasure::isotropic,
                  py::arg("gamma") = 2.0 * std::numbers::pi, py::arg("dim") = 2)
      .def_static("axis_parallel", &stit::HyperplaneMeasure::axis_parallel,
                  py::arg("gamma") = 4.0, py::arg("dim") = 2)
      .def_static("discrete", &discrete_measure, py::arg("gamma"), py::arg("atoms"),
                  "atoms: list of (direction, weight); must be even and normalized")
      .def_property_readonly("gamma", &stit::HyperplaneMeasure::gamma)
      .def_property_readonly("dim", &stit::HyperplaneMeasure::dim)
      .def(
          "lambda_window",
          [](const stit::HyperplaneMeasure& m, double half_side) {
            return stit::lambda_hit(m, stit::Window(half_side, m.dim()).polytope());
          },
          py::arg("half_side"), "Lambda([W]) for W = [-half_side, half_side]^l")
      .def(
          "big_L", [](const stit::HyperplaneMeasure& m, double a, double b) { return stit::big_L(m, a, b); },
          py::arg("a"), py::arg("b"), "L(a,b): the smallest separating-set measure")
      .def(
          "separating_measure",
          [](const stit::HyperplaneMeasure& m, double a, double b, int facet) {
            return stit::separating_measure(m, a, b, facet);
          },
          py::arg("a"), py::arg("b"), py::arg("facet"));

  py::class_<Simulation>(mod, "Simulation")
      .def_readonly("cells", &Simulation::cells)
      .def_readonly("jumps", &Simulation::jumps)
      .def_readonly("zeta", &Simulation::zeta)
      .def_readonly("zero_cell_volume", &Simulation::zero_cell_volume)
      .def_readonly("edge_length", &Simulation::edge_length)
      .def_readonly("tessellation_json", &Simulation::tessellation_json)
      .def_readonly("snapshot_json", &Simulation::snapshot_json);

  mod.def("simulate", &run_simulation, py::arg("measure"), py::arg("half_side"), py::arg("t"),
          py::arg("seed") = 1, py::arg("replicate") = 0,
          "Y_t n [-half_side, half_side]^l on random stream (seed, replicate)",
          py::call_guard<py::gil_scoped_release>());

  mod.def(
      "render_svg",
      [](const std::string& tessellation_json) {
        std::ostringstream out;
        stit::write_svg(out, stit::tessellation_from_json(tessellation_json));
        return out.str();
      },
      py::arg("tessellation_json"));

  mod.def(
      "sample_zeta",
      [](const stit::HyperplaneMeasure& m, double a, double t, std::size_t n, std::uint64_t seed,
         int threads) { return stit::sample_zeta(m, stit::Window(a, m.dim()), t, n, seed, threads); },
      py::arg("measure"), py::arg("a"), py::arg("t"), py::arg("n"), py::arg("seed") = 1,
      py::arg("threads") = 0, py::call_guard<py::gil_scoped_release>());
  mod.def(
      "zeta_threshold",
      [](const std::vector<double>& zeta, double eps) { return stit::zeta_threshold(zeta, eps); },
      py::arg("zeta"), py::arg("eps"));

  py::class_<stit::BetaBoundInputs>(mod, "BoundInputs")
      .def(py::init([](double a, double b, double t, double s, double M, int dim, double lambda_inner,
                       double L, double p_tail) {
             stit::BetaBoundInputs in{a, b, t, s, M, dim, lambda_inner, L, p_tail};
             in.validate();
             return in;
           }),
           py::arg("a"), py::arg("b"), py::arg("t"), py::arg("s"), py::arg("M"), py::arg("dim"),
           py::arg("lambda_inner"), py::arg("L"), py::arg("p_tail"))
      .def_readonly("a", &stit::BetaBoundInputs::a)
      .def_readonly("b", &stit::BetaBoundInputs::b)
      .def_readonly("t", &stit::BetaBoundInputs::t)
      .def_readonly("s", &stit::BetaBoundInputs::s)
      .def_readonly("M", &stit::BetaBoundInputs::M)
      .def_readonly("p_tail", &stit::BetaBoundInputs::p_tail);

  mod.def(
      "theorem2_bound",
      [](const stit::BetaBoundInputs& in, bool clamp) {
        return clamp ? stit::theorem2_bound(in) : stit::theorem2_bound_raw(in);
      },
      py::arg("inputs"), py::arg("clamp") = true);
  mod.def(
      "simplified_bound",
      [](const stit::BetaBoundInputs& in, bool clamp) {
        return clamp ? stit::simplified_bound(in) : stit::simplified_bound_raw(in);
      },
      py::arg("inputs"), py::arg("clamp") = true);
  mod.def("encapsulation_lower_bound", &stit::encapsulation_lower_bound, py::arg("measure"),
          py::arg("a"), py::arg("b"), py::arg("s"));
  mod.def("birth_chain_moment", &stit::birth_chain_moment, py::arg("q"), py::arg("t"), py::arg("r"));
  mod.def("birth_chain_tail", &stit::birth_chain_tail, py::arg("q"), py::arg("t"), py::arg("M"));

  mod.def("beta_from_table", &stit::beta_from_table, py::arg("counts"));
  mod.def(
      "beta_hat",
      [](const stit::HyperplaneMeasure& m, double a, double b, double t, std::size_t n,
         std::uint64_t seed, int per_side, double margin, int threads) {
        const auto probes = stit::ProbePartition::grid(a, b, m.dim(), per_side, margin);
        const auto est = stit::beta_hat(m, probes, t, n, seed, threads);
        return py::make_tuple(est.value, est.stderr_value);
      },
      py::arg("measure"), py::arg("a"), py::arg("b"), py::arg("t"), py::arg("n"),
      py::arg("seed") = 1, py::arg("per_side") = 2, py::arg("margin") = 2.0, py::arg("threads") = 0,
      "(beta_hat, bootstrap stderr) on the default probe grid");

  mod.def(
      "run_battery",
      [](const std::string& config_json) {
        std::vector<stit::CheckResult> results;
        {
          py::gil_scoped_release release;
          results = stit::run_battery(stit::parse_config(config_json));
        }
        py::list out;
        for (const auto& r : results) out.append(check_to_dict(r));
        return out;
      },
      py::arg("config_json") = "{}", "verification battery; returns one dict per check");
}
