// Copyright 2026 The ionswap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Python bindings: the `ionswap._core` extension module.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ionswap/config.hpp"
#include "ionswap/errors.hpp"
#include "ionswap/experiments.hpp"

namespace py = pybind11;
using namespace ionswap;

namespace {

py::dict excitation_dict(const ExcitationReport& r) {
  py::dict out;
  for (const auto& m : r.modes) out[py::str(m.label)] = py::make_tuple(m.mhz, m.nbar);
  return out;
}

Eigen::MatrixXd table_array(const TruthTable& t) { return t.table; }

ReadoutModel symmetric_readout(double eps) {
  ReadoutModel r;
  r.uniform = {eps, eps};
  r.validate();
  return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Ion-crystal swap, shuttling and analysis core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CalibrationError>(m, "CalibrationError", PyExc_RuntimeError);
  auto physics = py::register_exception<PhysicsError>(m, "PhysicsError", PyExc_RuntimeError);
  py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);
  (void)physics;

  py::class_<TrapGeometry>(m, "TrapGeometry")
      .def(py::init<>())
      .def_readwrite("first_segment", &TrapGeometry::first_segment)
      .def_readwrite("last_segment", &TrapGeometry::last_segment)
      .def_readwrite("liz_segment", &TrapGeometry::liz_segment)
      .def_readwrite("spacing", &TrapGeometry::spacing)
      .def_readwrite("axial_width", &TrapGeometry::axial_width)
      .def_readwrite("coupling", &TrapGeometry::coupling)
      .def_readwrite("kappa_y", &TrapGeometry::kappa_y)
      .def_readwrite("kappa_z", &TrapGeometry::kappa_z)
      .def_readwrite("diagonal_coupling", &TrapGeometry::diagonal_coupling)
      .def("center", &TrapGeometry::center);

  py::class_<CalibrationTargets>(m, "CalibrationTargets")
      .def(py::init<>())
      .def_readwrite("axial_mhz", &CalibrationTargets::axial_mhz)
      .def_readwrite("radial_low_mhz", &CalibrationTargets::radial_low_mhz)
      .def_readwrite("radial_high_mhz", &CalibrationTargets::radial_high_mhz)
      .def_readwrite("u_c", &CalibrationTargets::u_c);

  py::class_<FilterModel>(m, "FilterModel")
      .def(py::init<>())
      .def_readwrite("cutoff_mhz", &FilterModel::cutoff_mhz)
      .def_readwrite("q", &FilterModel::q);

  py::class_<SwapRampParams>(m, "SwapRampParams")
      .def(py::init<>())
      .def_readwrite("site", &SwapRampParams::site)
      .def_readwrite("u_d_peak", &SwapRampParams::u_d_peak)
      .def_readwrite("u_c_start", &SwapRampParams::u_c_start)
      .def_readwrite("u_c_deep", &SwapRampParams::u_c_deep)
      .def_readwrite("u_o_peak", &SwapRampParams::u_o_peak)
      .def_readwrite("breakpoints", &SwapRampParams::breakpoints)
      .def_readwrite("duration", &SwapRampParams::duration);

  m.def("calibrate", &calibrate, py::arg("targets") = CalibrationTargets{}, py::arg("base") = TrapGeometry{},
        "Scale the segment basis to hit the target single-ion frequencies.");

  m.def(
      "two_ion_modes",
      [](const TrapGeometry& g, double u_c) {
        const TrapModel model(g);
        const ElectrodePotential field(model, model.dense(single_well(g.liz_segment, u_c)));
        const double x0 = g.center(g.liz_segment);
        const auto modes = normal_modes(field, find_equilibrium(field, linear_guess(field, 2, x0)));
        std::vector<std::pair<std::string, double>> out;
        for (const auto& mode : modes.modes) out.emplace_back(mode.label, mode.mhz);
        return out;
      },
      py::arg("geometry"), py::arg("u_c") = -6.0, "(label, MHz) for the two-ion crystal at the LIZ.");

  m.def(
      "simulate_swap",
      [](const TrapGeometry& g, const SwapRampParams& p, const FilterModel& f, double dt) {
        const TrapModel model(g);
        IntegrationOptions o;
        o.dt = dt;
        o.stride = 0;
        SwapSimulation sim;
        {
          py::gil_scoped_release release;
          sim = simulate_swap(model, p, f, o);
        }
        py::dict out;
        out["swapped"] = sim.swapped;
        out["max_nbar"] = sim.excitation.max_nbar();
        out["modes"] = excitation_dict(sim.excitation);
        out["simulated_us"] = sim.simulated_us;
        return out;
      },
      py::arg("geometry"), py::arg("params") = SwapRampParams{}, py::arg("filter") = FilterModel{},
      py::arg("dt") = 0.002);

  m.def("effective_swap_duration", &effective_swap_duration, py::arg("params") = SwapRampParams{},
        py::arg("filter") = FilterModel{});
  m.def("filter_step_response", &filter_step_response, py::arg("filter"), py::arg("t"));

  m.def(
      "tomography",
      [](std::size_t shots, std::uint64_t seed, bool include_swap, double readout_error, int workers) {
        TomographyOptions o;
        o.shots = shots;
        o.seed = seed;
        o.include_swap = include_swap;
        o.readout = symmetric_readout(readout_error);
        o.workers = workers;
        TomographyRun run;
        {
          py::gil_scoped_release release;
          run = run_tomography(World{}, o);
        }
        py::dict out;
        out["fidelity_raw"] = run.analysis.fidelity_raw;
        out["fidelity_corrected"] = run.analysis.fidelity_corrected;
        out["chi_raw"] = Eigen::MatrixXcd(run.analysis.chi_raw);
        out["chi_corrected"] = Eigen::MatrixXcd(run.analysis.chi_corrected);
        out["counts"] = run.counts;
        return out;
      },
      py::arg("shots") = 1000, py::arg("seed") = 1, py::arg("include_swap") = true, py::arg("readout_error") = 0.0,
      py::arg("workers") = 1, "144-setting process tomography in logical mode.");

  m.def(
      "reorder",
      [](std::size_t shots, std::uint64_t seed, double readout_error) {
        ReorderOptions o;
        o.shots = shots;
        o.seed = seed;
        o.readout = symmetric_readout(readout_error);
        const auto run = run_reorder(World{}, o);
        py::dict out;
        out["inputs"] = run.inputs;
        out["outputs"] = run.outputs;
        out["fidelity_raw"] = run.raw.mean_fidelity;
        out["fidelity_corrected"] = run.corrected.mean_fidelity;
        out["table_raw"] = table_array(run.raw);
        out["table_clipped"] = table_array(run.clipped);
        out["duration_us"] = run.report.duration_us;
        out["shuttling_fraction"] = run.report.shuttling_fraction();
        out["transports"] = run.report.count(PrimitiveKind::transport);
        out["final_order"] = run.report.final_order();
        return out;
      },
      py::arg("shots") = 2500, py::arg("seed") = 1, py::arg("readout_error") = 0.0);

  py::class_<RabiDataset>(m, "RabiDataset")
      .def_property_readonly("transition", [](const RabiDataset& d) { return to_string(d.transition); })
      .def_readonly("times", &RabiDataset::times)
      .def_readonly("probabilities", &RabiDataset::probabilities)
      .def_readonly("shots", &RabiDataset::shots);

  m.def(
      "synthesize_rabi",
      [](const std::string& state, double nbar, const std::string& transition, std::vector<double> times,
         std::uint64_t shots, std::uint64_t seed, double eta, double omega0) {
        RabiParams p;
        p.eta = eta;
        p.omega0 = omega0;
        return synthesize_rabi(parse_motional_state(state), nbar, p, parse_transition(transition), times, shots, seed);
      },
      py::arg("state"), py::arg("nbar"), py::arg("transition"), py::arg("times"), py::arg("shots"),
      py::arg("seed"), py::arg("eta") = 0.1, py::arg("omega0") = 1.0);

  m.def(
      "fit_phonon_number",
      [](const std::vector<RabiDataset>& data, const std::string& model, double eta, int bootstrap,
         std::uint64_t seed) {
        FitOptions o;
        o.model = parse_motional_state(model);
        o.eta = eta;
        o.bootstrap = bootstrap;
        o.seed = seed;
        const auto r = fit_phonon_number(data, o);
        py::dict out;
        out["nbar"] = r.nbar;
        out["ci"] = py::make_tuple(r.ci_low, r.ci_high);
        out["omega0"] = r.omega0;
        out["chi2"] = r.chi2;
        return out;
      },
      py::arg("data"), py::arg("model") = "coherent", py::arg("eta") = 0.1, py::arg("bootstrap") = 200,
      py::arg("seed") = 1);

  m.def(
      "config_hash",
      [](const std::string& text) { return hash_hex(config_hash(config_from_json(Json::parse(text)))); },
      py::arg("config_json"), "Hash of a JSON config, ignoring seed and out.");
}
