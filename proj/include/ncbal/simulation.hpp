#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ncbal/diagnostics.hpp"

namespace ncbal {

struct RunSettings {
    CflMode cfl = CflMode::Strengthened;
    double zeta = 0.1;
    long max_steps = 1000;
    std::optional<double> final_time;
    /// Stop once V ≤ rtol·V⁰ (needs a target).
    bool stop_on_convergence = false;
    double rtol = 1e-10;
    int threads = 1;
    /// (H1) box: feeds η̲, η̄ and aborts the run when a cell leaves it.
    std::optional<PrimitiveBox> box;
    std::optional<StationaryField> target;
    bool check_convex_combination = false;
    /// Keep the per-step audits in the result (memory grows with steps × cells).
    bool keep_audits = false;
};

enum class StopReason { StepLimit, FinalTime, Converged };

struct RunResult {
    SolverState initial;
    SolverState final_state;
    std::vector<DiagnosticsRecord> records;  ///< step 0 first
    std::vector<StepAudit> audits;           ///< one per step when keep_audits
    std::optional<HessianBounds> bounds;
    StopReason reason = StopReason::StepLimit;
};

/// Called after every step (and once for the initial state with audit == nullptr).
using RunObserver =
    std::function<void(const SolverState& state, const DiagnosticsRecord& record, const StepAudit* audit)>;

/// Checks that Σ|K|v_K matches Σ|K|u⁰_K on the conserved components to 1e-10 relative.
/// Throws ConfigError otherwise.
void check_compatibility(const Model& model, const Mesh& mesh, const SolverState& initial,
                         const StationaryField& target);

/// Time loop: Δt from the current L_g every step, one DiagnosticsRecord per step.
/// Throws ConfigError for inconsistent settings and NumericalAbort from the step.
RunResult run(const Mesh& mesh, const NumericalFlux& flux, SolverState initial, const RunSettings& settings,
              const RunObserver& observer = {});

}  // namespace ncbal
