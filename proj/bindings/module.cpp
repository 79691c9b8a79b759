// Python surface: every entry point takes/returns JSON text, mirroring the
// CLI's config schema and report payloads; the package wrapper converts to
// and from dicts.  All RunConfig -> engine plumbing lives in lpm/driver.hpp
// so the two surfaces cannot drift apart.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "json.hpp"
#include "lpm/config.hpp"
#include "lpm/driver.hpp"
#include "lpm/errors.hpp"
#include "lpm/report.hpp"
#include "lpm/tail_law.hpp"
#include "lpm/verify.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

json analyze_payload(const lpm::RunConfig& cfg) { return lpm::analyze_payload(cfg); }

// Same object the CLI stores under report.json's "result" key.
json verify_payload(const lpm::RunConfig& cfg) {
    if (cfg.suite.kind == "laplace")
        return lpm::suite_result_to_json(lpm::theorem_suite(lpm::laplace_from_config(cfg)));
    if (cfg.suite.kind == "speed") {
        const lpm::SpeedResult r = lpm::speed_check(lpm::speed_from_config(cfg));
        json j = lpm::speed_result_to_json(r);
        j["verdict"] = lpm::verdict_name(lpm::speed_verdict(r));
        return j;
    }
    return lpm::stabilization_result_to_json(
        lpm::stabilization_check(lpm::stabilization_from_config(cfg)));
}

json simulate_payload(const lpm::RunConfig& cfg) {
    return lpm::simulate_payload(cfg, /*embed_atoms=*/true, nullptr);
}

json many2one_payload(const lpm::RunConfig& cfg) { return lpm::many_to_one_payload(cfg); }

std::string run_json(json (*fn)(const lpm::RunConfig&), const std::string& config_text) {
    return fn(lpm::parse_config_text(config_text)).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Last-progeny-modified branching random walk laboratory (core bindings)";

    py::register_exception<lpm::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<lpm::DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<lpm::RegimeError>(m, "RegimeError", PyExc_ValueError);
    py::register_exception<lpm::WindowError>(m, "WindowError", PyExc_ValueError);
    py::register_exception<lpm::BudgetError>(m, "BudgetError", PyExc_RuntimeError);

    m.def("config_hash",
          [](const std::string& text) { return lpm::config_hash(lpm::parse_config_text(text)); },
          py::arg("config_json"), "Stable hash of the experiment definition");
    m.def("canonical_config",
          [](const std::string& text) {
              return lpm::config_to_json(lpm::parse_config_text(text)).dump();
          },
          py::arg("config_json"), "Round-tripped canonical config JSON");

    m.def("analyze_json",
          [](const std::string& text) { return run_json(&analyze_payload, text); },
          py::arg("config_json"));
    m.def("simulate_json",
          [](const std::string& text) { return run_json(&simulate_payload, text); },
          py::arg("config_json"), py::call_guard<py::gil_scoped_release>());
    m.def("verify_json",
          [](const std::string& text) { return run_json(&verify_payload, text); },
          py::arg("config_json"), py::call_guard<py::gil_scoped_release>());
    m.def("many2one_json",
          [](const std::string& text) { return run_json(&many2one_payload, text); },
          py::arg("config_json"), py::call_guard<py::gil_scoped_release>());

    m.def("tail_survival",
          [](double theta, double alpha, double c, double x) {
              return lpm::TailLaw(theta, alpha, c).survival(x);
          },
          py::arg("theta"), py::arg("alpha"), py::arg("c"), py::arg("x"));
    m.def("tail_quantile",
          [](double theta, double alpha, double c, double u) {
              return lpm::TailLaw(theta, alpha, c).quantile(u);
          },
          py::arg("theta"), py::arg("alpha"), py::arg("c"), py::arg("u"));
}
