// Python extension: report-producing commands plus direct access to the norm solver.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qrobust/cli.hpp"

namespace py = pybind11;
using namespace qrobust;

namespace {

using CArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;

ComplexMatrix from_array(const CArray& a) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-d array");
  const std::size_t r = a.shape(0), c = a.shape(1);
  ComplexMatrix m(r, c);
  auto v = a.unchecked<2>();
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = v(i, j);
  return m;
}

CArray to_array(const ComplexMatrix& m) {
  CArray a({m.rows(), m.cols()});
  auto v = a.mutable_unchecked<2>();
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) v(i, j) = m(i, j);
  return a;
}

Superoperator channel_of(const std::vector<CArray>& kraus) {
  std::vector<ComplexMatrix> ops;
  for (const auto& k : kraus) ops.push_back(from_array(k));
  return Superoperator(std::move(ops));
}

// Commands report failures through exit_code; the GIL is released while they run.
template <class Req>
std::string run(AnalysisReport (*cmd)(const Req&), const Req& req) {
  AnalysisReport r;
  {
    py::gil_scoped_release release;
    r = cmd(req);
  }
  return report_to_json(r);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Robustness analysis of noisy quantum while-programs";
  m.attr("__version__") = kToolVersion;
  m.attr("REPORT_SCHEMA_VERSION") = kReportSchemaVersion;

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericalFailure>(m, "NumericalFailure", PyExc_ArithmeticError);
  py::register_exception<Infeasible>(m, "Infeasible", PyExc_ValueError);
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  m.def(
      "analyze",
      [](const std::string& file, const ParamMap& params, bool semantic, std::optional<std::string> annotation,
         bool discover_annotation) {
        AnalyzeRequest req;
        req.file = file;
        req.params = params;
        req.semantic = semantic;
        req.annotation = annotation;
        req.discover_annotation = discover_annotation;
        return run(&cmd_analyze, req);
      },
      py::arg("file"), py::arg("params") = ParamMap{}, py::arg("semantic") = false, py::arg("annotation") = py::none(),
      py::arg("discover_annotation") = true, "Derive a robustness bound; returns the JSON report");

  m.def(
      "diamond",
      [](const std::string& a, const std::string& b, const std::string& q, double lambda, std::uint64_t seed,
         int trials) {
        DiamondRequest req;
        req.spec_a = a;
        req.spec_b = b;
        req.q = q;
        req.lambda = lambda;
        req.seed = seed;
        req.trials = trials;
        return run(&cmd_diamond, req);
      },
      py::arg("a"), py::arg("b"), py::arg("q") = "", py::arg("lam") = 0.0, py::arg("seed") = 20241014,
      py::arg("trials") = 2000, "(Q, lambda)-diamond distance between channel specs; returns the JSON report");

  m.def(
      "bounded",
      [](const std::string& file, const ParamMap& params, int n_max) {
        BoundedRequest req;
        req.file = file;
        req.params = params;
        req.n_max = n_max;
        return run(&cmd_bounded, req);
      },
      py::arg("file"), py::arg("params") = ParamMap{}, py::arg("n_max") = 10);

  m.def(
      "simulate",
      [](const std::string& file, const std::string& input, const std::string& mode, const ParamMap& params) {
        SimulateRequest req;
        req.file = file;
        req.input = input;
        req.mode = mode;
        req.params = params;
        return run(&cmd_simulate, req);
      },
      py::arg("file"), py::arg("input"), py::arg("mode") = "op", py::arg("params") = ParamMap{});

  m.def(
      "q_lambda_diamond_norm",
      [](const std::vector<CArray>& a, const std::vector<CArray>& b, std::optional<CArray> q, double lambda) {
        const Superoperator e = channel_of(a), f = channel_of(b);
        const ComplexMatrix qm = q ? from_array(*q) : ComplexMatrix::identity(e.d_in());
        py::gil_scoped_release release;
        return q_lambda_diamond_norm(e, f, Predicate(qm), lambda);
      },
      py::arg("kraus_a"), py::arg("kraus_b"), py::arg("q") = py::none(), py::arg("lam") = 0.0,
      "Norm of the difference of two channels given as Kraus lists");

  m.def(
      "choi",
      [](const std::vector<CArray>& kraus) { return to_array(choi_rect(channel_of(kraus))); }, py::arg("kraus"),
      "Choi matrix, output factor first");

  m.def(
      "matrix",
      [](const std::string& expr) { return to_array(eval_matrix(expr)); }, py::arg("expr"),
      "Evaluates a matrix expression such as \"H\" or \"|0><0|\"");
}
