#include "ncbal/simulation.hpp"

#include <cmath>
#include <sstream>

#include "ncbal/errors.hpp"

namespace ncbal {

void check_compatibility(const Model& model, const Mesh& mesh, const SolverState& initial,
                         const StationaryField& target) {
    const double defect = compatibility_defect(model, mesh, initial, target);
    if (defect > 1e-10) {
        std::ostringstream msg;
        msg << "the stationary target does not carry the initial totals of the conserved components"
            << " (relative mismatch " << defect << "); the equilibrium is unreachable";
        throw ConfigError(msg.str());
    }
}

namespace {

DiagnosticsRecord base_record(const Model& model, const Mesh& mesh, const SolverState& s,
                              const std::optional<StationaryField>& target) {
    DiagnosticsRecord r;
    r.step = s.step;
    r.time = s.time;
    r.totals = component_totals(mesh, s);
    for (std::size_t k = 0; k < mesh.cell_count(); ++k)
        r.total_entropy += mesh.cells()[k].measure * model.entropy(s.u[k], s.alpha[k]);
    if (target) r.lyapunov = lyapunov(model, mesh, s, *target);
    return r;
}

}  // namespace

RunResult run(const Mesh& mesh, const NumericalFlux& flux, SolverState initial, const RunSettings& settings,
              const RunObserver& observer) {
    const Model& model = flux.model();
    if (initial.u.size() != mesh.cell_count() || initial.alpha.size() != mesh.cell_count())
        throw ConfigError("initial state does not match the mesh");
    if (settings.max_steps < 0) throw ConfigError("max_steps must be nonnegative");
    if (settings.threads < 1) throw ConfigError("threads must be at least 1");
    if (settings.cfl == CflMode::Strengthened && !settings.box)
        throw ConfigError("the strengthened CFL mode needs a declared box");
    if (!(settings.zeta > 0.0 && settings.zeta < 1.0)) throw ConfigError("zeta must lie in (0, 1)");
    if (settings.stop_on_convergence && !settings.target)
        throw ConfigError("stop_on_convergence needs a stationary target");
    if (settings.final_time && !(*settings.final_time >= initial.time)) throw ConfigError("final_time lies in the past");

    for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
        try {
            model.check_admissible(initial.u[k], initial.alpha[k]);
        } catch (const DomainError& err) {
            throw ConfigError("initial state, cell " + std::to_string(k) + ": " + err.what());
        }
        if (settings.box && !settings.box->contains(model, initial.u[k], initial.alpha[k]))
            throw ConfigError("initial state, cell " + std::to_string(k) + " lies outside the declared box " + format_box(model, *settings.box));
    }
    if (settings.target) {
        if (settings.target->states.size() != mesh.cell_count())
            throw ConfigError("stationary target does not match the mesh");
        check_compatibility(model, mesh, initial, *settings.target);
    }

    RunResult result;
    if (settings.box) {
        try {
            result.bounds = hessian_bounds(model, *settings.box);
        } catch (const DomainError& err) {
            throw ConfigError(std::string("declared box: ") + err.what());
        }
    }
    result.initial = initial;

    StepOptions options;
    options.threads = settings.threads;
    options.check_convex_combination = settings.check_convex_combination;
    options.box = settings.box ? &*settings.box : nullptr;

    AuditParams audit_params;
    audit_params.zeta = settings.zeta;
    audit_params.eta_low = result.bounds ? result.bounds->low : 0.0;

    SolverState state = std::move(initial);
    DiagnosticsRecord rec = base_record(model, mesh, state, settings.target);
    result.records.push_back(rec);
    if (observer) observer(state, rec, nullptr);
    const double v0 = rec.lyapunov;

    StepTrace trace;
    for (;;) {
        if (state.step >= settings.max_steps) {
            result.reason = StopReason::StepLimit;
            break;
        }
        if (settings.final_time && state.time >= *settings.final_time) {
            result.reason = StopReason::FinalTime;
            break;
        }
        const double lg = global_lipschitz(flux, mesh, state);
        if (!(lg > 0.0) || !std::isfinite(lg)) throw NumericalAbort("wave-speed bound is not positive and finite", state.step + 1, -1);
        double dt = cfl_timestep(mesh, lg, settings.cfl, settings.zeta, result.bounds);
        if (settings.final_time) dt = std::min(dt, *settings.final_time - state.time);

        SolverState next = step(state, mesh, flux, dt, options, &trace);
        audit_params.lipschitz = lg;
        StepAudit audit = audit_step(mesh, flux, state, next, trace, dt, audit_params,
                                     settings.target ? &*settings.target : nullptr);

        rec = base_record(model, mesh, next, settings.target);
        rec.dt = dt;
        rec.lipschitz = lg;
        rec.worst_residual = audit.worst_residual;
        rec.worst_relative_residual = audit.worst_relative_residual;
        rec.total_dissipation = audit.total_dissipation;
        for (std::size_t k = 0; k < mesh.cell_count(); ++k)
            rec.max_stationarity_residual =
                std::max(rec.max_stationarity_residual, (next.u[k] - state.u[k]).cwiseAbs().maxCoeff() / dt);
        if (!std::isfinite(rec.total_entropy) || !std::isfinite(rec.lyapunov))
            throw NumericalAbort("non-finite diagnostics", next.step, -1);

        state = std::move(next);
        result.records.push_back(rec);
        if (observer) observer(state, rec, &audit);
        if (settings.keep_audits) result.audits.push_back(std::move(audit));

        if (settings.stop_on_convergence && rec.lyapunov <= settings.rtol * v0) {
            result.reason = StopReason::Converged;
            break;
        }
    }
    result.final_state = std::move(state);
    return result;
}

}  // namespace ncbal
