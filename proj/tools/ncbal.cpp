#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ncbal/acceptance.hpp"
#include "ncbal/config.hpp"
#include "ncbal/errors.hpp"

namespace fs = std::filesystem;
using namespace ncbal;

namespace {

enum Exit { kOk = 0, kConfig = 1, kAbort = 2, kFailed = 3 };

fs::path output_dir(const fs::path& configured) {
    if (const char* env = std::getenv("NCBAL_OUTPUT_DIR"); env && *env) return fs::path(env);
    return configured;
}

std::string snapshot_name(const std::string& prefix, long step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_%06ld.csv", step);
    return prefix + buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int cmd_run(const std::string& config_path) {
    const RunConfig config = load_config(config_path);
    const Problem problem = build_problem(config);
    const fs::path dir = output_dir(config.output.directory);
    fs::create_directories(dir);

    std::ofstream diag(dir / config.output.diagnostics);
    if (!diag) throw ConfigError("cannot write " + (dir / config.output.diagnostics).string());
    DiagnosticsWriter writer(diag, problem.model->components());

    auto snapshot = [&](const SolverState& s) {
        std::ofstream out(dir / snapshot_name(config.output.snapshot_prefix, s.step));
        write_snapshot(out, problem.mesh, s);
    };
    long last_snapshot = -1;
    const auto observer = [&](const SolverState& s, const DiagnosticsRecord& rec, const StepAudit*) {
        writer.write(rec);
        if (s.step == 0 || (config.output.snapshot_every > 0 && s.step % config.output.snapshot_every == 0)) {
            snapshot(s);
            last_snapshot = s.step;
        }
    };

    RunResult result;
    try {
        result = run(problem.mesh, *problem.flux, problem.initial, problem.settings, observer);
    } catch (const NumericalAbort& err) {
        diag.flush();
        std::cerr << "ncbal run: numerical abort at " << err.what() << '\n';
        return kAbort;
    }
    if (result.final_state.step != last_snapshot) snapshot(result.final_state);

    const DiagnosticsRecord& last = result.records.back();
    const char* reason = result.reason == StopReason::Converged ? "converged"
                         : result.reason == StopReason::FinalTime ? "final time"
                                                                  : "step limit";
    std::printf("steps=%ld time=%.17g stop=%s lyapunov=%.17g total_entropy=%.17g\n", result.final_state.step,
                result.final_state.time, reason, last.lyapunov, last.total_entropy);
    std::printf("diagnostics: %s\n", (dir / config.output.diagnostics).string().c_str());
    return kOk;
}

struct CheckFluxArgs {
    std::string flux, model, box, contracts, alpha, report;
    std::size_t samples = 10000;
    std::uint64_t seed = 1;
    double gravity = 9.81;
};

int cmd_check_flux(const CheckFluxArgs& a) {
    ModelParams params;
    params.gravity = a.gravity;
    const ModelPtr model = make_model(a.model, params);
    const FluxPtr flux = make_flux(a.flux, model);
    SampleSpec spec;
    spec.box = parse_box(*model, a.box);
    spec.samples = a.samples;
    spec.seed = a.seed;
    spec.contracts = split(a.contracts, ',');
    if (!a.alpha.empty()) {
        const auto parts = split(a.alpha, ':');
        if (parts.size() != 2) throw ConfigError("--alpha expects lo:hi");
        try {
            spec.step_alpha = Interval{std::stod(parts[0]), std::stod(parts[1])};
        } catch (const std::exception&) {
            throw ConfigError("--alpha expects numbers, got '" + a.alpha + "'");
        }
        if (!(spec.step_alpha->lo < spec.step_alpha->hi)) throw ConfigError("--alpha must be a nonempty interval");
    }
    const ContractReport report = certify_contracts(*flux, spec);
    const std::string csv = report.to_csv();

    const fs::path path = a.report.empty() ? output_dir(".") / ("contracts_" + a.flux + "_" + a.model + ".csv")
                                           : fs::path(a.report);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write report " + path.string());
    out << csv;
    std::cout << csv;
    return report.passed() ? kOk : kFailed;
}

// "uniform_1d:cells=4,x_min=0" or "structured_2d:nx=2,ny=2,element=triangle"; anything else is a path.
Mesh mesh_from_argument(const std::string& arg) {
    const auto colon = arg.find(':');
    const std::string head = arg.substr(0, colon);
    if ((head != "uniform_1d" && head != "structured_2d") || fs::exists(arg)) return load_mesh(arg);
    std::string text = "[mesh]\nbuilder = " + head + "\n";
    if (colon != std::string::npos) {
        for (const std::string& kv : split(arg.substr(colon + 1), ',')) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("mesh spec: expected key=value, got '" + kv + "'");
            text += kv.substr(0, eq) + " = " + kv.substr(eq + 1) + "\n";
        }
    }
    return build_mesh(parse_config(text).mesh);
}

int cmd_mesh_info(const std::string& arg) {
    const Mesh mesh = mesh_from_argument(arg);
    const RegularityQuotients q = regularity_quotients(mesh);
    std::printf("dimension=%d\ncells=%zu\ninterior_faces=%zu\nwall_faces=%zu\n", mesh.dimension(), mesh.cell_count(),
                mesh.interior_face_count(), mesh.wall_face_count());
    std::printf("h_mesh=%.17g\na_mesh=%.17g\n", mesh.size(), mesh.regularity());
    std::printf("min_volume_ratio=%.17g (cell %d)\nmin_perimeter_ratio=%.17g (cell %d)\n", q.min_volume_ratio,
                q.worst_volume_cell, q.min_perimeter_ratio, q.worst_perimeter_cell);
    std::printf("total_measure=%.17g\nclosure_defect=%.3e\n", mesh.total_measure(), closure_defect(mesh));
    return kOk;
}

int cmd_verify(const std::string& suite, const std::string& flux_override, int threads) {
    VerifyOptions options;
    if (!flux_override.empty()) options.flux_override = flux_override;
    options.threads = threads;
    Verifier verifier(options);
    const auto results = verifier.run_suite(suite);
    int failed = 0;
    std::string failed_names;
    for (const auto& r : results) {
        std::printf("%s\n", format_result(r).c_str());
        std::fflush(stdout);
        if (!r.passed) {
            ++failed;
            failed_names += (failed_names.empty() ? "" : ",") + r.name;
        }
    }
    std::printf("summary suite=%s criteria=%zu passed=%zu failed=%d%s%s\n", suite.c_str(), results.size(),
                results.size() - failed, failed, failed ? " failing=" : "", failed_names.c_str());
    return failed == 0 ? kOk : kFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Finite-volume solver for balance laws with a stationary field"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "Run a simulation from a config file");
    run_cmd->add_option("config", config_path, "Config file")->required();

    CheckFluxArgs cf;
    auto* check_cmd = app.add_subcommand("check-flux", "Certify a numerical flux against its contracts");
    check_cmd->add_option("--flux", cf.flux, "rusanov | hydrostatic | acoustic")->required();
    check_cmd->add_option("--model", cf.model, "sw1d | sw2d | porous_euler | lagrangian")->required();
    check_cmd->add_option("--box", cf.box, "Primitive box, e.g. h=0.5:2,U=-1:1,alpha=0:0.5")->required();
    check_cmd->add_option("--samples", cf.samples, "Number of sampled pairs")->capture_default_str();
    check_cmd->add_option("--seed", cf.seed, "Random seed")->capture_default_str();
    check_cmd->add_option("--contracts", cf.contracts, "Comma-separated subset of F1,F2,F3,F4,F5");
    check_cmd->add_option("--alpha", cf.alpha, "alpha range lo:hi for stepped pairs");
    check_cmd->add_option("--gravity", cf.gravity, "Gravity for shallow-water models")->capture_default_str();
    check_cmd->add_option("--report", cf.report, "Report path (default contracts_<flux>_<model>.csv)");

    std::string mesh_arg;
    auto* mesh_cmd = app.add_subcommand("mesh-info", "Print mesh counts and regularity");
    mesh_cmd->add_option("mesh", mesh_arg, "Mesh file or builder spec such as uniform_1d:cells=4")->required();

    std::string suite, flux_override;
    int threads = 1;
    auto* verify_cmd = app.add_subcommand("verify", "Run acceptance scenarios");
    verify_cmd->add_option("suite", suite, "wellbalance | lyapunov | entropy | conservation | cone | all")->required();
    verify_cmd->add_option("--flux-override", flux_override, "Flux for the shallow-water scenarios");
    verify_cmd->add_option("--threads", threads, "Threads per step")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        if (*run_cmd) return cmd_run(config_path);
        if (*check_cmd) return cmd_check_flux(cf);
        if (*mesh_cmd) return cmd_mesh_info(mesh_arg);
        if (*verify_cmd) return cmd_verify(suite, flux_override, threads);
    } catch (const NumericalAbort& e) {
        std::cerr << "ncbal: numerical abort at " << e.what() << '\n';
        return kAbort;
    } catch (const std::exception& e) {
        // Config, parse, mesh and domain errors, plus file-system failures.
        std::cerr << "ncbal: " << e.what() << '\n';
        return kConfig;
    }
    return kConfig;
}
