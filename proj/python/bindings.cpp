#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "chiral/core.hpp"
#include "chiral/design.hpp"
#include "chiral/error.hpp"
#include "chiral/robustness.hpp"
#include "chiral/sweep.hpp"

namespace py = pybind11;
using namespace chiral;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::array_t<double> populations_array(const std::vector<std::array<double, 3>>& rows) {
  py::array_t<double> out({rows.size(), std::size_t{3}});
  auto m = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j) m(i, j) = rows[i][j];
  return out;
}

InvariantSchedule make_schedule(const std::string& scheme, double n, double T) {
  if (scheme == "sps") return sps_schedule(T);
  if (scheme == "ansatz") return ansatz_schedule(n, T);
  return SchemeSpec::parse(scheme).make(T);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Invariant-based pulse design and simulation for cyclic three-level chiral molecules";
  m.attr("__version__") = CHIRAL_LRI_VERSION;

  static py::exception<Error> chiral_error(m, "ChiralError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object err = py::handle(chiral_error.ptr())(e.what());
      err.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(chiral_error.ptr(), err.ptr());
    }
  });

  py::enum_<Handedness>(m, "Handedness").value("LEFT", Handedness::Left).value("RIGHT", Handedness::Right);
  py::enum_<SensitivityKind>(m, "SensitivityKind")
      .value("SYSTEMATIC", SensitivityKind::Systematic)
      .value("DETUNING", SensitivityKind::Detuning);

  m.def(
      "build_hamiltonian",
      [](Handedness h, double omega, double omega_q, double gamma) {
        return build_general_hamiltonian(h, omega, omega, omega_q, gamma).matrix();
      },
      py::arg("handedness"), py::arg("omega"), py::arg("omega_q"), py::arg("gamma") = std::numbers::pi / 2,
      "Cyclic Hamiltonian (hbar = 1) as a 3x3 complex array.");

  py::class_<InvariantSchedule>(m, "InvariantSchedule")
      .def_property_readonly("label", &InvariantSchedule::label)
      .def_property_readonly("duration", &InvariantSchedule::duration)
      .def_property_readonly("n", &InvariantSchedule::ansatz_n)
      .def("phi", &InvariantSchedule::phi)
      .def("theta", &InvariantSchedule::theta)
      .def("phi_dot", &InvariantSchedule::phi_dot)
      .def("theta_dot", &InvariantSchedule::theta_dot)
      .def("closed_form_eta_plus", &InvariantSchedule::closed_form_eta_plus)
      .def("__repr__", [](const InvariantSchedule& s) {
        return "<InvariantSchedule " + s.label() + " T=" + format_number(s.duration()) + ">";
      });

  m.def("sps_schedule", &sps_schedule, py::arg("T") = 1.0);
  m.def("ansatz_schedule", &ansatz_schedule, py::arg("n"), py::arg("T") = 1.0);
  m.def("schedule", &make_schedule, py::arg("scheme"), py::arg("n") = kOssN, py::arg("T") = 1.0,
        "sps, ansatz (with n), or a named scheme such as oss, osd, ansatz:<n>.");

  m.def(
      "invariant_matrix",
      [](Handedness h, double phi, double theta) { return invariant_matrix(h, {phi, theta}).matrix(); },
      py::arg("handedness"), py::arg("phi"), py::arg("theta"));

  m.def(
      "pulses",
      [](const InvariantSchedule& s, std::size_t steps, double clamp_scale) {
        const auto p = pulses_on_nodes(s, TimeGrid{s.duration(), steps}, clamp_scale / s.duration());
        std::vector<double> om, oq;
        for (const auto& r : p.samples) {
          om.push_back(r.omega);
          oq.push_back(r.omega_q);
        }
        py::dict d;
        d["t"] = to_array(p.times);
        d["omega"] = to_array(om);
        d["omega_q"] = to_array(oq);
        d["clamped"] = p.clamped_count;
        return d;
      },
      py::arg("schedule"), py::arg("steps") = 4000, py::arg("clamp_scale") = kDefaultClampScale,
      "Pulses on the grid nodes; frequencies in the schedule's time unit.");

  m.def(
      "validate",
      [](const InvariantSchedule& s, std::size_t steps) {
        const auto r = validate_schedule(s, {steps});
        py::dict checks;
        for (const auto& c : r.checks) checks[py::str(c.name)] = py::make_tuple(c.passed, c.worst_residual);
        return py::make_tuple(r.passed(), checks);
      },
      py::arg("schedule"), py::arg("steps") = 4000, "Returns (passed, {check: (passed, worst_residual)}).");

  m.def(
      "eta_plus",
      [](const InvariantSchedule& s, const std::vector<double>& t) {
        const auto phase = lr_phase(s);
        std::vector<double> out;
        for (double x : t) out.push_back(phase.eta_plus(x));
        return to_array(out);
      },
      py::arg("schedule"), py::arg("t"));

  m.def("q_alpha", &q_alpha, py::arg("schedule"), py::arg("tol") = 1e-10);
  m.def("q_delta", &q_delta, py::arg("schedule"), py::arg("tol") = 1e-10);

  m.def(
      "perturbative_fidelity",
      [](const InvariantSchedule& s, double alpha, double delta) {
        return perturbative_fidelity(s, ErrorModel::combined(alpha, delta));
      },
      py::arg("schedule"), py::arg("alpha") = 0.0, py::arg("delta") = 0.0);

  m.def(
      "exact_fidelity",
      [](const InvariantSchedule& s, Handedness h, double alpha, double delta, std::size_t steps, double clamp_scale) {
        py::gil_scoped_release release;
        return exact_fidelity(s, ErrorModel::combined(alpha, delta), h, {steps, clamp_scale, 1e-10});
      },
      py::arg("schedule"), py::arg("handedness"), py::arg("alpha") = 0.0, py::arg("delta") = 0.0,
      py::arg("steps") = 4000, py::arg("clamp_scale") = kDefaultClampScale,
      "Overlap of the final state with |3> (left) or |1> (right) starting from |2>.");

  m.def(
      "population_trace",
      [](const InvariantSchedule& s, Handedness h, std::size_t steps, std::size_t points) {
        SweepSettings settings;
        settings.duration = s.duration();
        settings.steps = steps;
        const auto traj = population_trace(s, h, settings, points);
        return py::make_tuple(to_array(traj.times), populations_array(traj.populations));
      },
      py::arg("schedule"), py::arg("handedness"), py::arg("steps") = 4000, py::arg("points") = 201,
      "Returns (times, populations[:, 3]).");

  m.def(
      "optimize_n",
      [](SensitivityKind kind, double n_min, double n_max, double tol, std::size_t coarse_points) {
        OptimizeOptions opts;
        opts.coarse_points = coarse_points;
        const auto r = optimize_n(kind, n_min, n_max, tol, opts);
        py::dict d;
        d["n_star"] = r.n_star;
        d["q_min"] = r.q_min;
        d["exact_check"] = r.exact_check;
        d["perturbative_check"] = r.perturbative_check;
        d["n"] = to_array(r.coarse_n);
        d["q"] = to_array(r.coarse_q);
        return d;
      },
      py::arg("kind"), py::arg("n_min") = 0.5, py::arg("n_max") = 1.5, py::arg("tol") = 1e-3,
      py::arg("coarse_points") = 201);
}
