#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "warpimm/errors.hpp"
#include "warpimm/forms.hpp"
#include "warpimm/harness/commands.hpp"
#include "warpimm/warped.hpp"

namespace py = pybind11;
using namespace warpimm;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of warpimm";

  py::exception<Error>(m, "WarpimmError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const py::object type = py::module_::import("warpimm._core").attr("WarpimmError");
      PyErr_SetString(type.ptr(), e.toJson().dump().c_str());
    }
  });

  m.def("commands", &harness::commandNames);

  m.def(
      "run_json",
      [](const std::string& command, const std::string& args, const std::string& config) {
        harness::RunConfig cfg;
        if (!config.empty()) cfg.merge(Json::parse(config));
        return harness::runCommand(command, Json::parse(args), cfg).dump();
      },
      py::arg("command"), py::arg("arguments"), py::arg("config") = "");

  m.def(
      "nullities",
      [](const std::vector<MatrixXd>& ops, double rankTol, std::uint64_t seed) {
        forms::NullityOptions o;
        o.rankTol = rankTol;
        o.seed = seed;
        return forms::nullityProfile(forms::SymmetricBilinearForm::make(ops, 1e-10), o).values;
      },
      py::arg("ops"), py::arg("rank_tol") = 1e-9, py::arg("seed") = 0x5eed);

  m.def(
      "gauss_tensor",
      [](const std::vector<MatrixXd>& ops, const VectorXd& x, const VectorXd& y, const VectorXd& z, const VectorXd& w) {
        return forms::gaussTensor(forms::SymmetricBilinearForm::make(ops, 1e-10), x, y, z, w);
      },
      py::arg("ops"), py::arg("x"), py::arg("y"), py::arg("z"), py::arg("w"));

  m.def(
      "group_warping_samples",
      [](const MatrixXd& samples, double tol) {
        const auto g = warped::groupWarpingSamples(samples, tol);
        return py::make_tuple(g.groups, g.lambda);
      },
      py::arg("samples"), py::arg("tol") = 1e-9);
}
