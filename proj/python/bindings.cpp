#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "ultrafield/error.hpp"
#include "ultrafield/field.hpp"
#include "ultrafield/pdo.hpp"
#include "ultrafield/tree.hpp"
#include "ultrafield/tree_io.hpp"
#include "ultrafield/wavelets.hpp"

namespace py = pybind11;
using namespace ultrafield;

namespace {

template <typename T>
std::vector<T> to_vector(std::span<const T> items) {
  return {items.begin(), items.end()};
}

void bind_tree(py::module_& m) {
  py::class_<VertexId>(m, "VertexId")
      .def(py::init([](std::uint32_t v) { return VertexId{v}; }))
      .def_readonly("value", &VertexId::value)
      .def("__eq__", [](VertexId a, VertexId b) { return a == b; })
      .def("__lt__", [](VertexId a, VertexId b) { return a < b; })
      .def("__hash__", [](VertexId v) { return std::hash<VertexId>{}(v); })
      .def("__repr__", [](VertexId v) { return "VertexId(" + std::to_string(v.value) + ")"; });

  py::class_<BallTree>(m, "BallTree")
      .def_property_readonly("vertex_count", &BallTree::vertex_count)
      .def_property_readonly("leaf_count", &BallTree::leaf_count)
      .def_property_readonly("interior_count", &BallTree::interior_count)
      .def_property_readonly("height", &BallTree::height)
      .def_property_readonly("total_measure", &BallTree::total_measure)
      .def_property_readonly("root", &BallTree::root)
      .def_property_readonly("leaves", [](const BallTree& t) { return to_vector(t.leaves()); })
      .def_property_readonly("interior", [](const BallTree& t) { return to_vector(t.interior()); })
      .def("children", [](const BallTree& t, VertexId v) { return to_vector(t.children(v)); })
      .def("parent", &BallTree::parent)
      .def("is_leaf", &BallTree::is_leaf)
      .def("depth", &BallTree::depth)
      .def("measure", &BallTree::measure)
      .def("name", &BallTree::name)
      .def("at", &BallTree::at, "Vertex with the given name")
      .def("leaf_index", &BallTree::leaf_index)
      .def("within", &BallTree::within);

  py::class_<TreeDocument>(m, "TreeDocument")
      .def_readonly("name", &TreeDocument::name)
      .def_readonly("tree", &TreeDocument::tree)
      .def_readonly("symbol", &TreeDocument::symbol);

  m.def("parse_tree", &parse_tree, py::arg("text"));
  m.def("load_tree", &load_tree, py::arg("path"));
  m.def(
      "serialize_tree",
      [](const BallTree& tree, const std::string& name, std::optional<std::vector<double>> symbol) {
        if (!symbol) return serialize_tree(tree, name);
        return serialize_tree(tree, name, *symbol);
      },
      py::arg("tree"), py::arg("name"), py::arg("symbol_by_vertex") = py::none());
  m.def("generate_homogeneous", &generate_homogeneous, py::arg("p"), py::arg("depth"),
        py::arg("total_measure") = 1.0);
  m.def(
      "generate_random",
      [](std::uint64_t seed, int max_depth, int max_branching, double low, double high, double split) {
        return generate_random(seed, RandomTreeParams{max_depth, max_branching, low, high, split});
      },
      py::arg("seed"), py::arg("max_depth") = 3, py::arg("max_branching") = 4, py::arg("measure_low") = 0.1,
      py::arg("measure_high") = 1.0, py::arg("split_probability") = 0.6);
  m.def("sup", &sup);
  m.def("child_toward", &child_toward);
  m.def("distance", &distance);
}

void bind_wavelets(py::module_& m) {
  py::class_<Wavelet>(m, "Wavelet")
      .def_readonly("vertex", &Wavelet::vertex)
      .def_readonly("index", &Wavelet::index)
      .def_readonly("coeffs", &Wavelet::coeffs);

  py::class_<WaveletBasis>(m, "WaveletBasis")
      .def_property_readonly("wavelets", [](const WaveletBasis& b) { return to_vector(b.wavelets()); })
      .def("at", [](const WaveletBasis& b, VertexId v) { return to_vector(b.at(v)); })
      .def_property_readonly("constant_value", &WaveletBasis::constant_value)
      .def("__len__", &WaveletBasis::size);

  m.def("build_basis", &build_basis);
  m.def("evaluate", &evaluate);
  m.def("basis_matrix", &basis_matrix);
  m.def("gram_matrix", &gram_matrix);
  m.def("projector_sum_check", [](const BallTree& t, const WaveletBasis& b, VertexId i, VertexId x, VertexId y) {
    const auto check = projector_sum_check(t, b, i, x, y);
    return py::make_tuple(check.wavelet_sum, check.projector_value, check.holds);
  });
}

void bind_pdo(py::module_& m) {
  py::class_<Symbol>(m, "Symbol")
      .def(py::init([](const BallTree& t, std::vector<double> values) { return Symbol(t, values); }),
           py::arg("tree"), py::arg("interior_values"))
      .def_static("from_document", &Symbol::from_document)
      .def_static("constant", &Symbol::constant)
      .def_static("by_depth", &Symbol::by_depth)
      .def_static("random", &Symbol::random, py::arg("tree"), py::arg("seed"), py::arg("low"), py::arg("high"),
                  py::arg("zero_probability") = 0.0)
      .def("__call__", &Symbol::operator())
      .def_property_readonly("by_vertex", [](const Symbol& s) { return to_vector(s.by_vertex()); });

  py::class_<Spectrum>(m, "Spectrum")
      .def("__call__", &Spectrum::operator())
      .def_property_readonly("by_vertex", [](const Spectrum& s) { return to_vector(s.by_vertex()); });

  m.def("spectrum", &spectrum);
  m.def("eigenvalue_path_sum", &eigenvalue_path_sum);
  m.def("apply_dense", &apply_dense);

  py::class_<EigenReport>(m, "EigenReport")
      .def_readonly("max_residual", &EigenReport::max_residual)
      .def_readonly("worst_vertex", &EigenReport::worst_vertex)
      .def_readonly("constant_residual", &EigenReport::constant_residual)
      .def("passes", &EigenReport::passes);
  m.def("verify_eigen", &verify_eigen);

  py::class_<SeriesVerdict>(m, "SeriesVerdict")
      .def_readonly("evaluated", &SeriesVerdict::evaluated)
      .def_readonly("converges", &SeriesVerdict::converges)
      .def_readonly("ratio", &SeriesVerdict::ratio)
      .def_readonly("partial_sum", &SeriesVerdict::partial_sum)
      .def_readonly("tail", &SeriesVerdict::tail)
      .def_readonly("value", &SeriesVerdict::value)
      .def_readonly("closed_form", &SeriesVerdict::closed_form);
  py::class_<ConvergenceReport>(m, "ConvergenceReport")
      .def_readonly("conv1", &ConvergenceReport::conv1)
      .def_readonly("conv2", &ConvergenceReport::conv2);
  m.def(
      "convergence_report",
      [](int p, double mu, double q, int levels) {
        GeometricFamily family;
        family.branching = p;
        family.measure_ratio = mu;
        family.symbol_ratio = q;
        family.levels_probe = levels;
        return convergence_report(family);
      },
      py::arg("p"), py::arg("measure_ratio"), py::arg("symbol_ratio"), py::arg("levels_probe") = 40);
}

void bind_field(py::module_& m) {
  py::class_<CovarianceKernel>(m, "CovarianceKernel")
      .def("__call__", &CovarianceKernel::operator())
      .def("between", &CovarianceKernel::between)
      .def_property_readonly("by_vertex", [](const CovarianceKernel& k) { return to_vector(k.by_vertex()); });

  m.def("kernel_value", &kernel_value);
  m.def("covariance_kernel", &covariance_kernel);
  m.def("kernel_bruteforce", &kernel_bruteforce);
  m.def("kernel_matrix", &kernel_matrix);

  py::class_<FieldSample>(m, "FieldSample")
      .def_readonly("values", &FieldSample::values)
      .def_readonly("seed", &FieldSample::seed)
      .def_readonly("index", &FieldSample::index)
      .def_readonly("coefficients", &FieldSample::coefficients);
  py::class_<WhiteNoiseSample>(m, "WhiteNoiseSample")
      .def_readonly("values", &WhiteNoiseSample::values)
      .def_readonly("seed", &WhiteNoiseSample::seed)
      .def_readonly("coefficients", &WhiteNoiseSample::coefficients);

  m.def("sample_field", &sample_field, py::arg("tree"), py::arg("spectrum"), py::arg("basis"), py::arg("seed"),
        py::arg("index") = 0);
  m.def("sample_white_noise", &sample_white_noise, py::arg("tree"), py::arg("basis"), py::arg("seed"),
        py::arg("index") = 0);
  m.def("check_equation", &check_equation);
  m.def("bilinear_form", &bilinear_form);

  py::class_<MarkovCheck>(m, "MarkovCheck")
      .def_readonly("value", &MarkovCheck::value)
      .def_readonly("scale", &MarkovCheck::scale)
      .def_readonly("violation", &MarkovCheck::violation)
      .def("covered", &MarkovCheck::covered)
      .def("vanishes", &MarkovCheck::vanishes, py::arg("tol") = 1e-12);
  m.def("markov_check", &markov_check);

  py::class_<EmpiricalCovariance>(m, "EmpiricalCovariance")
      .def_readonly("empirical", &EmpiricalCovariance::empirical)
      .def_readonly("analytic", &EmpiricalCovariance::analytic)
      .def_readonly("standard_error", &EmpiricalCovariance::standard_error)
      .def_readonly("max_abs_dev", &EmpiricalCovariance::max_abs_dev)
      .def_readonly("max_sigma", &EmpiricalCovariance::max_sigma)
      .def("within", &EmpiricalCovariance::within);
  m.def("empirical_covariance", &empirical_covariance, py::arg("tree"), py::arg("spectrum"), py::arg("basis"),
        py::arg("samples"), py::arg("seed") = 0);
}

}  // namespace

PYBIND11_MODULE(_ultrafield, m) {
  m.doc() = "Gaussian random fields on ultrametric ball trees";

  py::register_exception<Error>(m, "UltrafieldError", PyExc_ValueError);

  bind_tree(m);
  bind_wavelets(m);
  bind_pdo(m);
  bind_field(m);
}
