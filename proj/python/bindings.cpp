#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "iel/estimators.hpp"
#include "iel/exact.hpp"
#include "iel/experiment.hpp"
#include "iel/numerics.hpp"
#include "iel/parallel.hpp"
#include "iel/systems.hpp"

namespace py = pybind11;

namespace {

using Rows = std::vector<std::vector<double>>;

iel::ReferenceMeasure measure_arg(const iel::System& sys, const std::string& name) {
  if (name.empty()) return sys.default_measure();
  const auto m = iel::parse_measure(name);
  if (!m) throw py::value_error("unknown measure '" + name + "'");
  return *m;
}

// Geometric systems take coordinate lists, the shift takes symbol lists.
iel::Point to_point(const iel::System& sys, const std::vector<double>& v) {
  if (sys.kind() != iel::SystemKind::FullShift) return iel::Point::at(std::span<const double>(v));
  if (v.size() > static_cast<std::size_t>(iel::kMaxWord)) throw py::value_error("word too long");
  iel::Point p;
  p.word_len = static_cast<std::uint8_t>(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) p.word[i] = static_cast<std::uint8_t>(v[i]);
  return p;
}

std::vector<double> from_point(const iel::System& sys, const iel::Point& p) {
  if (sys.kind() != iel::SystemKind::FullShift) return {p.x.begin(), p.x.begin() + p.dim};
  return {p.word.begin(), p.word.begin() + p.word_len};
}

py::dict pair_dict(const iel::InvariantPair& p) {
  py::dict d;
  d["forward_entropy"] = p.forward_entropy;
  d["inverse_entropy"] = p.inverse_entropy;
  d["folding_entropy"] = p.folding_entropy;
  d["lyapunov"] = p.lyapunov;
  d["provenance"] = p.provenance;
  if (p.inverse_bounds) d["inverse_bounds"] = py::make_tuple(p.inverse_bounds->first, p.inverse_bounds->second);
  return d;
}

}  // namespace

PYBIND11_MODULE(_iel, m) {
  m.doc() = "Inverse entropy of non-invertible dynamical systems";
  m.attr("__version__") = IEL_VERSION;

  m.def("set_thread_count", &iel::set_thread_count);
  m.def("determinant", [](const Rows& a) { return iel::determinant(iel::SquareMatrix::from_rows(a)); });
  m.def("eigenvalues", [](const Rows& a) { return iel::eigenvalues(iel::SquareMatrix::from_rows(a)); });
  m.def("fit_slope", [](const std::vector<std::pair<int, double>>& pts) {
    std::vector<iel::SlopePoint> sp;
    for (const auto& [n, y] : pts) sp.push_back({n, y});
    const auto f = iel::fit_slope(sp);
    return py::dict(py::arg("slope") = f.slope, py::arg("intercept") = f.intercept, py::arg("stderr") = f.std_error,
                    py::arg("num_points") = f.num_points, py::arg("residual_rms") = f.residual_rms);
  });

  m.def("toral_invariants", [](const Rows& a) { return pair_dict(iel::toral_invariants(iel::SquareMatrix::from_rows(a))); });
  m.def("fat_baker_inverse_from_dimension", [](double beta, double delta) {
    const auto r = iel::fat_baker_inverse_from_dimension(beta, delta);
    return py::dict(py::arg("inverse_entropy") = r.inverse_entropy, py::arg("overlap_number") = r.overlap_number);
  });
  m.def("tsujii_invariants", [](int l, double lam) {
    const auto r = iel::tsujii_invariants(l, lam);
    return py::dict(py::arg("forward") = r.forward, py::arg("folding") = r.folding,
                    py::arg("inverse_exact_ac") = r.inverse_exact_ac,
                    py::arg("inverse_bounds") = py::make_tuple(r.inverse_low, r.inverse_high));
  });
  m.def("distinguish", [](const Rows& a, const Rows& b) {
    return iel::distinguish(iel::SquareMatrix::from_rows(a), iel::SquareMatrix::from_rows(b)).verdict;
  });

  py::class_<iel::System>(m, "System")
      .def_static("toral_linear",
                  [](const Rows& a, const std::string& metric) {
                    const auto mt = iel::parse_metric(metric);
                    if (!mt) throw py::value_error("unknown metric '" + metric + "'");
                    return iel::System::toral_linear(iel::SquareMatrix::from_rows(a), *mt);
                  },
                  py::arg("matrix"), py::arg("metric") = "torus-sup")
      .def_static("expanding_circle", [](int d) { return iel::System::expanding_circle(d); })
      .def_static("full_shift", [](std::vector<double> p) { return iel::System::full_shift(std::move(p)); })
      .def_static("fat_baker", &iel::System::fat_baker)
      .def_static("tsujii",
                  [](int l, double lam, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs) {
                    return iel::System::tsujii(l, lam, iel::TrigPolynomial{std::move(cos_coeffs), std::move(sin_coeffs)});
                  },
                  py::arg("l"), py::arg("lam"), py::arg("cos_coeffs"), py::arg("sin_coeffs"))
      .def("apply", [](const iel::System& s, const std::vector<double>& x) { return from_point(s, s.apply(to_point(s, x))); })
      .def("preimages",
           [](const iel::System& s, const std::vector<double>& x) {
             std::vector<std::vector<double>> out;
             for (const auto& p : s.preimages(to_point(s, x))) out.push_back(from_point(s, p));
             return out;
           })
      .def("distance", [](const iel::System& s, const std::vector<double>& a,
                          const std::vector<double>& b) { return s.distance(to_point(s, a), to_point(s, b)); })
      .def_property_readonly("diameter", &iel::System::diameter)
      .def("__repr__", &iel::System::describe);

  py::class_<iel::EstimatorConfig>(m, "EstimatorConfig")
      .def(py::init<>())
      .def_readwrite("radii", &iel::EstimatorConfig::radii)
      .def_readwrite("depths", &iel::EstimatorConfig::depths)
      .def_readwrite("anchors", &iel::EstimatorConfig::anchors)
      .def_readwrite("samples_per_ball", &iel::EstimatorConfig::samples_per_ball)
      .def_readwrite("burn_in", &iel::EstimatorConfig::burn_in)
      .def_readwrite("seed", &iel::EstimatorConfig::seed)
      .def_readwrite("min_hits", &iel::EstimatorConfig::min_hits)
      .def("validate", &iel::EstimatorConfig::validate);

  py::class_<iel::EntropyReport>(m, "EntropyReport")
      .def_readonly("extrapolated", &iel::EntropyReport::extrapolated)
      .def_readonly("stderr", &iel::EntropyReport::std_error)
      .def_readonly("eps_used", &iel::EntropyReport::eps_used)
      .def_readonly("anchors_used", &iel::EntropyReport::anchors_used)
      .def_readonly("balls_skipped", &iel::EntropyReport::balls_skipped)
      .def_readonly("failed", &iel::EntropyReport::failed)
      .def_readonly("notes", &iel::EntropyReport::notes);

  auto estimator = [&m](const char* name, auto fn) {
    m.def(name,
          [fn](const iel::System& s, const iel::EstimatorConfig& cfg, const std::string& measure) {
            py::gil_scoped_release release;
            return fn(s, measure_arg(s, measure), cfg);
          },
          py::arg("system"), py::arg("config"), py::arg("measure") = "");
  };
  estimator("estimate_inverse_entropy", &iel::estimate_inverse_entropy);
  estimator("estimate_forward_entropy", &iel::estimate_forward_entropy);
  estimator("estimate_folding_entropy", &iel::estimate_folding_entropy);
  m.def("estimate_lyapunov_spectrum", &iel::estimate_lyapunov_spectrum, py::call_guard<py::gil_scoped_release>());
  m.def("estimate_pointwise_dimension", [](double beta, const iel::EstimatorConfig& cfg) {
    const auto d = iel::estimate_pointwise_dimension(beta, cfg);
    return py::dict(py::arg("dimension") = d.fit.slope, py::arg("stderr") = d.fit.std_error,
                    py::arg("centers") = d.centers, py::arg("ladder_truncated") = d.ladder_truncated,
                    py::arg("notes") = d.notes);
  });

  // Runs a config document and returns report.json as text; the Python wrapper decodes it.
  m.def("run_config_json", [](const std::string& text) {
    const auto cfg = iel::parse_config(text);
    py::gil_scoped_release release;
    return iel::run_experiment(cfg).report.dump();
  });

  py::register_exception<iel::ConfigError>(m, "ConfigError", PyExc_ValueError);
}
