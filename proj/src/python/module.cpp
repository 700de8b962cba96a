#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fock/harness.hpp"
#include "fock/io.hpp"

namespace py = pybind11;
using fock::harness::json;

namespace {

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw fock::ConfigError(std::string("json: ") + e.what());
  }
}

fock::harness::RunConfig config_from(const std::string& text) {
  auto c = fock::harness::parse_config(parse(text));
  fock::harness::apply_environment(c);
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Weighted Fock space numerics";

  auto& base = py::register_exception<fock::Error>(m, "FockError", PyExc_RuntimeError);
  py::register_exception<fock::ConfigError>(m, "ConfigError", base.ptr());

  m.def("suite_names", &fock::harness::suite_names);

  m.def(
      "rho",
      [](const std::string& weight, std::complex<double> z, double L, std::size_t n) {
        const auto spec = fock::io::weight_from_json(parse(weight));
        py::gil_scoped_release release;
        return fock::harness::rho_at(spec, z, L, n);
      },
      py::arg("weight"), py::arg("z"), py::arg("L") = 0.0, py::arg("n") = 257);

  m.def(
      "kernel",
      [](const std::string& config, const std::vector<std::pair<std::complex<double>, std::complex<double>>>& pairs) {
        const auto c = config_from(config);
        fock::io::Table t;
        {
          py::gil_scoped_release release;
          t = fock::harness::kernel_table(c, pairs);
        }
        std::vector<std::pair<std::complex<double>, double>> out;
        for (const auto& r : t.rows) out.emplace_back(std::complex<double>{r[4], r[5]}, r[6]);
        return out;
      },
      py::arg("config"), py::arg("pairs"));

  m.def(
      "run_suite",
      [](const std::string& config, const std::string& suite) {
        const auto c = config_from(config);
        json report;
        {
          py::gil_scoped_release release;
          report = fock::harness::to_json(fock::harness::run_suite(c, suite));
        }
        return report.dump();
      },
      py::arg("config"), py::arg("suite"));

  m.def(
      "config_hash", [](const std::string& config) { return fock::harness::config_hash(config_from(config)); },
      py::arg("config"));
}
