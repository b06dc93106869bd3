#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "smallcells/analytic.hpp"
#include "smallcells/common.hpp"
#include "smallcells/experiments.hpp"
#include "smallcells/io.hpp"
#include "smallcells/model.hpp"
#include "smallcells/sampler.hpp"
#include "smallcells/special.hpp"

namespace py = pybind11;
using namespace smallcells;

namespace {

std::vector<std::vector<double>> sample_cells(const TessellationModel& model,
                                              std::uint64_t n,
                                              std::uint64_t seed,
                                              std::uint32_t workers) {
  std::vector<std::vector<double>> out;
  out.reserve(n);
  for (TypicalCell& c : sample_stream(model, {seed, n, workers}))
    out.push_back(std::move(c.edge_lengths));
  return out;
}

using PyEntry = std::tuple<std::uint64_t, double, std::vector<double>>;

std::vector<PyEntry> py_select_k_smallest(const TessellationModel& model,
                                          std::uint64_t n, std::uint32_t k,
                                          std::uint64_t seed,
                                          std::uint32_t workers,
                                          const std::string& functional) {
  TopKSelection sel = select_k_smallest(
      model, {seed, n, workers}, functional_from_token(functional), k);
  std::vector<PyEntry> out;
  out.reserve(sel.entries.size());
  for (TopKEntry& e : sel.entries)
    out.emplace_back(e.sample_index, e.size, std::move(e.edge_lengths));
  return out;
}

std::string py_study_json(const TessellationModel& model, std::uint64_t n,
                          std::uint32_t k, std::uint64_t seed,
                          std::uint32_t workers) {
  return study_report_json(run_small_cell_study(model, n, k, seed, workers),
                           "");
}

std::string py_convergence_csv(const TessellationModel& model,
                               const std::vector<double>& eps,
                               const std::vector<double>& thresholds,
                               std::uint64_t n, std::uint64_t seed,
                               std::uint32_t workers,
                               const std::string& conditioning) {
  ConvergenceReport rep =
      run_convergence_study(model, eps, thresholds, n, seed, workers,
                            functional_from_token(conditioning));
  std::string out = csv_convergence(rep, ShapeKind::Sigma);
  for (const ConvergenceRow& r : rep.rows)
    if (r.kind == ShapeKind::Tau) {
      out += csv_convergence(rep, ShapeKind::Tau);
      break;
    }
  return out;
}

using PySegment = std::tuple<int, double, double, double, double, double>;

std::vector<PySegment> py_tessellate(const TessellationModel& model,
                                     std::uint64_t seed, double x0, double y0,
                                     double x1, double y1) {
  WindowTessellation t = sample_window_tessellation(model, seed, x0, y0, x1, y1);
  std::vector<PySegment> out;
  out.reserve(t.segments.size());
  for (const Segment& s : t.segments)
    out.emplace_back(s.family, s.offset, s.x0, s.y0, s.x1, s.y1);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Shape of small cells in stationary Poisson line/hyperplane "
      "tessellations: samplers, analytic laws, studies";

  py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);

  py::class_<TessellationModel>(m, "Model")
      .def_readonly("dimension", &TessellationModel::dimension)
      .def_readonly("gamma", &TessellationModel::gamma)
      .def("__str__",
           [](const TessellationModel& mdl) { return model_to_string(mdl); });

  m.def("standard_model_2d", &standard_model_2d,
        "orthogonal two-direction planar model with unit edge rates");
  m.def("standard_model_3d", &standard_model_3d,
        "axis-aligned spatial model with unit edge rates");
  m.def("model_from_string", &model_from_string, py::arg("text"));
  m.def("model_to_string", &model_to_string, py::arg("model"));
  m.def(
      "edge_rates",
      [](const TessellationModel& mdl) { return edge_rates(mdl).rates; },
      py::arg("model"));

  m.def("sample_cells", &sample_cells, py::arg("model"), py::arg("n"),
        py::arg("seed") = 0, py::arg("workers") = 1,
        "edge lengths of typical cells, one row per cell");
  m.def(
      "sigma",
      [](const std::vector<double>& e) {
        return sigma(std::span<const double>(e));
      },
      py::arg("edges"));
  m.def(
      "tau",
      [](const std::vector<double>& e) {
        return tau(std::span<const double>(e));
      },
      py::arg("edges"));

  m.def(
      "cdf_half_perimeter",
      [](double g1, double g2, double p) {
        return cdf_half_perimeter({g1, g2}, p);
      },
      py::arg("gamma1"), py::arg("gamma2"), py::arg("p"));
  m.def(
      "joint_sigma_perimeter",
      [](double g1, double g2, double eps, double p) {
        return joint_sigma_perimeter({g1, g2}, eps, p);
      },
      py::arg("gamma1"), py::arg("gamma2"), py::arg("eps"), py::arg("p"));
  m.def(
      "cond_sigma_given_perimeter",
      [](double g1, double g2, double eps, double p) {
        return cond_sigma_given_perimeter({g1, g2}, eps, p);
      },
      py::arg("gamma1"), py::arg("gamma2"), py::arg("eps"), py::arg("p"));
  m.def(
      "prob_area_less", [](double a) { return prob_area_less(a); },
      py::arg("a"), "P(XY < a) for the unit-rate planar cell");
  m.def(
      "numerator_sigma_area",
      [](double eps, double a) { return numerator_sigma_area(eps, a); },
      py::arg("eps"), py::arg("a"));
  m.def(
      "cond_sigma_given_area",
      [](double eps, double a) { return cond_sigma_given_area(eps, a); },
      py::arg("eps"), py::arg("a"));
  m.def(
      "cond_tau_given_area",
      [](double eps, double a) { return cond_tau_given_area(eps, a); },
      py::arg("eps"), py::arg("a"));
  m.def("exp_integral_e1", &exp_integral_e1, py::arg("x"));
  m.def("bessel_k1", &bessel_k1, py::arg("z"));

  m.def("select_k_smallest", &py_select_k_smallest, py::arg("model"),
        py::arg("n"), py::arg("k"), py::arg("seed") = 0,
        py::arg("workers") = 1, py::arg("functional") = "area",
        "(sample_index, size, edge_lengths) of the k smallest cells, "
        "ascending");
  m.def("study_report_json", &py_study_json, py::arg("model"), py::arg("n"),
        py::arg("k"), py::arg("seed") = 0, py::arg("workers") = 1);
  m.def("convergence_csv", &py_convergence_csv, py::arg("model"),
        py::arg("eps"), py::arg("thresholds"), py::arg("n"),
        py::arg("seed") = 0, py::arg("workers") = 1,
        py::arg("conditioning") = "area");
  m.def("tessellate_window", &py_tessellate, py::arg("model"), py::arg("seed"),
        py::arg("x0"), py::arg("y0"), py::arg("x1"), py::arg("y1"),
        "(family, offset, x0, y0, x1, y1) line segments clipped to the "
        "window");
}
