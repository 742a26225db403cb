#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "muskat/commands.hpp"
#include "muskat/errors.hpp"
#include "muskat/io.hpp"

namespace py = pybind11;
using namespace muskat;

namespace {

py::array_t<double> to_array(std::span<const double> v) {
  py::array_t<double> a(v.size());
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

py::array_t<double> to_array(const StripField& u) {
  py::array_t<double> a({u.grid().n2, u.grid().n1});
  std::copy(u.data().begin(), u.data().end(), a.mutable_data());
  return a;
}

PeriodicField field(py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a 1-d array");
  return PeriodicField(std::vector<double>(a.data(), a.data() + a.size()));
}

py::dict report_dict(const EnergyReport& r) {
  py::dict d;
  d["t"] = r.t;
  d["l2_h"] = r.l2_h;
  d["h2_h"] = r.h2_h;
  d["h2p5_h"] = r.h2p5_h;
  d["E_running"] = r.E_running;
  d["scriptE"] = r.script_E;
  d["scriptD"] = r.script_D;
  d["rt_margin"] = r.rt_margin;
  d["l2_law_residual"] = r.l2_law_residual;
  d["coupling_ratio"] = r.coupling_ratio;
  d["dissipation_l2"] = r.dissipation_l2;
  d["mean_h"] = r.mean_h;
  d["top_flux"] = r.top_flux;
  return d;
}

// Captures the text a command prints.
py::tuple captured(const std::function<int(std::ostream&, std::ostream&)>& cmd) {
  std::ostringstream out, err;
  int rc;
  {
    py::gil_scoped_release release;
    rc = cmd(out, err);
  }
  return py::make_tuple(rc, out.str(), err.str());
}

}  // namespace

PYBIND11_MODULE(_muskat, m) {
  m.doc() = "Muskat interface evolution with a permeability jump";
  m.attr("__version__") = version_string();

  auto base = py::register_exception<Error>(m, "MuskatError", PyExc_RuntimeError);
  py::register_exception<ResolutionMismatch>(m, "ResolutionMismatch", base.ptr());
  py::register_exception<DiffeoDegenerate>(m, "DiffeoDegenerate", base.ptr());
  py::register_exception<GapViolation>(m, "GapViolation", base.ptr());
  py::register_exception<NonSPDSystem>(m, "NonSPDSystem", base.ptr());
  py::register_exception<SolverDivergence>(m, "SolverDivergence", base.ptr());
  py::register_exception<NoContraction>(m, "NoContraction", base.ptr());
  py::register_exception<InsufficientData>(m, "InsufficientData", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  m.def("nodes", [](int n) {
    std::vector<double> x(n);
    for (int j = 0; j < n; ++j) x[j] = node(n, j);
    return to_array(x);
  }, py::arg("n"), "Grid points -pi + 2 pi j / n.");

  m.def("sobolev_norm", [](py::array_t<double> h, double s) { return sobolev_norm(field(h), SobolevIndex(s)); },
        py::arg("h"), py::arg("s"));
  m.def("deriv", [](py::array_t<double> h, int order) { return to_array(deriv(field(h), order).values()); },
        py::arg("h"), py::arg("order") = 1);
  m.def("mollify", [](py::array_t<double> h, double delta) { return to_array(mollify(field(h), delta).values()); },
        py::arg("h"), py::arg("delta"));

  m.def("dispersion_rate", py::overload_cast<int, double, double>(&dispersion_rate), py::arg("k"),
        py::arg("beta_plus"), py::arg("beta_minus"));

  py::enum_<SolverKind>(m, "SolverKind")
      .value("gmres", SolverKind::gmres)
      .value("direct", SolverKind::direct);

  py::class_<SimConfig>(m, "SimConfig")
      .def(py::init<>())
      .def_readwrite("n1", &SimConfig::n1)
      .def_readwrite("n2_plus", &SimConfig::n2_plus)
      .def_readwrite("n2_minus", &SimConfig::n2_minus)
      .def_readwrite("beta_plus", &SimConfig::beta_plus)
      .def_readwrite("beta_minus", &SimConfig::beta_minus)
      .def_readwrite("dt_safety", &SimConfig::dt_safety)
      .def_readwrite("t_end", &SimConfig::t_end)
      .def_readwrite("gap_tol", &SimConfig::gap_tol)
      .def_readwrite("j_min", &SimConfig::j_min)
      .def_readwrite("solver", &SimConfig::solver)
      .def_readwrite("report_every", &SimConfig::report_every)
      .def("validate", &SimConfig::validate)
      .def_property_readonly("dt", &time_step);

  m.def("solve_head", [](const SimConfig& c, py::array_t<double> h, py::array_t<double> f, bool picard) {
    const Model model = Model::from_config(c, field(f));
    const PeriodicField hh = field(h);
    const MetricPack up = metric_terms(harmonic_extension(hh, model.profile.f, model.upper), model.profile, c.j_min);
    const MetricPack lo = metric_terms(harmonic_extension(hh, model.profile.f, model.lower), model.profile, c.j_min);
    const HeadSolution s = picard ? picard_head(up, lo, hh, model.profile)
                                  : solve_head(up, lo, hh, model.profile, model.solver);
    py::dict d;
    d["p_upper"] = to_array(s.p_upper);
    d["p_lower"] = to_array(s.p_lower);
    d["w1_upper"] = to_array(s.w1_upper);
    d["w2_upper"] = to_array(s.w2_upper);
    d["w1_lower"] = to_array(s.w1_lower);
    d["w2_lower"] = to_array(s.w2_lower);
    d["gamma_trace_w2"] = to_array(s.gamma_trace_w2.values());
    d["iterations"] = s.iterations;
    d["residual"] = s.residual;
    return d;
  }, py::arg("config"), py::arg("h"), py::arg("f"), py::arg("picard") = false,
     "Head and velocity for interface h over permeability curve f.");

  m.def("run", [](const SimConfig& c, py::array_t<double> h0, py::array_t<double> f) {
    Trajectory t;
    {
      const PeriodicField hh = field(h0), ff = field(f);
      py::gil_scoped_release release;
      t = run(c, hh, ff);
    }
    py::list samples;
    for (const Sample& s : t.samples) samples.append(report_dict(s.report));
    py::dict d;
    d["termination"] = to_string(t.reason);
    d["message"] = t.message;
    d["error_time"] = t.error_time;
    d["dt"] = t.dt;
    d["steps"] = t.final_state.step_count;
    d["t"] = t.final_state.t;
    d["h"] = to_array(t.final_state.h.values());
    d["reports"] = samples;
    return d;
  }, py::arg("config"), py::arg("h0"), py::arg("f"));

  m.def("read_snapshot", [](const std::filesystem::path& p) {
    const Snapshot s = read_snapshot(p);
    auto grid = [](const std::vector<double>& v, std::uint32_t n2, std::uint32_t n1) {
      py::array_t<double> a({n2, n1});
      std::copy(v.begin(), v.end(), a.mutable_data());
      return a;
    };
    py::dict d;
    d["t"] = s.t;
    d["h"] = to_array(s.h);
    d["f"] = to_array(s.f);
    d["p_upper"] = grid(s.p_upper, s.n2_plus, s.n1);
    d["p_lower"] = grid(s.p_lower, s.n2_minus, s.n1);
    d["w1_upper"] = grid(s.w1_upper, s.n2_plus, s.n1);
    d["w2_upper"] = grid(s.w2_upper, s.n2_plus, s.n1);
    d["w1_lower"] = grid(s.w1_lower, s.n2_minus, s.n1);
    d["w2_lower"] = grid(s.w2_lower, s.n2_minus, s.n1);
    return d;
  }, py::arg("path"));

  // The CLI commands; each returns (exit_code, stdout, stderr).
  m.def("cmd_run", [](const std::string& p) {
    return captured([&](std::ostream& o, std::ostream& e) { return cmd_run(p, o, e); });
  }, py::arg("config_path"));
  m.def("cmd_dispersion", [](double bp, double bm, int k) {
    return captured([&](std::ostream& o, std::ostream& e) { return cmd_dispersion(bp, bm, k, o, e); });
  }, py::arg("beta_plus"), py::arg("beta_minus"), py::arg("k_max"));
  m.def("cmd_check", [](const std::string& p) {
    return captured([&](std::ostream& o, std::ostream& e) { return cmd_check(p, o, e); });
  }, py::arg("config_path"));
  m.def("cmd_convergence", [](const std::string& p) {
    return captured([&](std::ostream& o, std::ostream& e) { return cmd_convergence(p, o, e); });
  }, py::arg("config_path"));
}
