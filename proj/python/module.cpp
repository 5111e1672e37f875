#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "ncbal/acceptance.hpp"
#include "ncbal/config.hpp"
#include "ncbal/errors.hpp"

namespace py = pybind11;
using namespace ncbal;

namespace {

const char* stop_reason(StopReason r) {
    switch (r) {
        case StopReason::Converged: return "converged";
        case StopReason::FinalTime: return "final time";
        case StopReason::StepLimit: return "step limit";
    }
    return "";
}

// Runs a config given as text; returns the diagnostics CSV and the final snapshot CSV as strings.
py::dict run_config(const std::string& text, const std::string& base_dir) {
    const RunConfig config = parse_config(text, base_dir);
    const Problem problem = build_problem(config);
    std::ostringstream diag;
    DiagnosticsWriter writer(diag, problem.model->components());
    RunResult result;
    {
        py::gil_scoped_release release;
        result = run(problem.mesh, *problem.flux, problem.initial, problem.settings,
                     [&](const SolverState&, const DiagnosticsRecord& rec, const StepAudit*) { writer.write(rec); });
    }
    std::ostringstream initial, final_state;
    write_snapshot(initial, problem.mesh, result.initial);
    write_snapshot(final_state, problem.mesh, result.final_state);

    py::dict out;
    out["diagnostics"] = diag.str();
    out["initial_snapshot"] = initial.str();
    out["final_snapshot"] = final_state.str();
    out["steps"] = result.final_state.step;
    out["time"] = result.final_state.time;
    out["stop"] = stop_reason(result.reason);
    out["lake_level"] = problem.lake_level;
    return out;
}

py::tuple check_flux(const std::string& flux_name, const std::string& model_name, const std::string& box,
                     std::size_t samples, std::uint64_t seed, const std::vector<std::string>& contracts,
                     std::optional<std::pair<double, double>> alpha, double gravity) {
    ModelParams params;
    params.gravity = gravity;
    const ModelPtr model = make_model(model_name, params);
    const FluxPtr flux = make_flux(flux_name, model);
    SampleSpec spec;
    spec.box = parse_box(*model, box);
    spec.samples = samples;
    spec.seed = seed;
    spec.contracts = contracts;
    if (alpha) spec.step_alpha = Interval{alpha->first, alpha->second};
    const ContractReport report = certify_contracts(*flux, spec);
    return py::make_tuple(report.passed(), report.to_csv());
}

py::list verify(const std::string& suite, std::optional<std::string> flux_override, int threads) {
    VerifyOptions options;
    options.flux_override = std::move(flux_override);
    options.threads = threads;
    std::vector<CriterionResult> results;
    {
        py::gil_scoped_release release;
        results = Verifier(options).run_suite(suite);
    }
    py::list out;
    for (const auto& r : results) {
        py::dict d;
        d["name"] = r.name;
        d["passed"] = r.passed;
        d["detail"] = r.detail;
        d["seconds"] = r.seconds;
        d["line"] = format_result(r);
        out.append(d);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_ncbal, m) {
    m.doc() = "Bindings for the ncbal finite-volume core";

    static py::exception<NumericalAbort> abort_exc(m, "NumericalAbort", PyExc_RuntimeError);
    static py::exception<ConfigError> config_exc(m, "ConfigError", PyExc_ValueError);
    static py::exception<DomainError> domain_exc(m, "DomainError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const NumericalAbort& e) {
            py::set_error(abort_exc, e.what());
        } catch (const ParseError& e) {
            py::set_error(config_exc, e.what());
        } catch (const MeshValidationError& e) {
            py::set_error(config_exc, e.what());
        } catch (const ConfigError& e) {
            py::set_error(config_exc, e.what());
        } catch (const DomainError& e) {
            py::set_error(domain_exc, e.what());
        }
    });

    m.def("run_config", &run_config, py::arg("text"), py::arg("base_dir") = ".",
          "Run a config given as text. Returns diagnostics and snapshot CSV text plus the stop reason.");
    m.def("check_flux", &check_flux, py::arg("flux"), py::arg("model"), py::arg("box"), py::arg("samples") = 10000,
          py::arg("seed") = 1, py::arg("contracts") = std::vector<std::string>{}, py::arg("alpha") = py::none(),
          py::arg("gravity") = 9.81, "Certify a flux; returns (passed, report_csv).");
    m.def("verify", &verify, py::arg("suite"), py::arg("flux_override") = py::none(), py::arg("threads") = 1,
          "Run an acceptance suite; one dict per criterion.");
    m.def("diagnostics_header", &diagnostics_header, py::arg("components"));
    m.def("suites", &Verifier::suites);
}
