#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ncbal/fluxes.hpp"
#include "ncbal/mesh.hpp"
#include "ncbal/solver.hpp"

namespace ncbal {

/// Per-cell entropy accounting of one step n → n+1.
struct StepAudit {
    std::vector<double> residual;           ///< r_K
    std::vector<double> bound;              ///< 𝒟_K ≤ 0
    std::vector<double> relative_residual;  ///< relative-entropy residual; empty without a target
    double worst_residual = 0.0;            ///< max_K (r_K − 𝒟_K)
    double worst_relative_residual = 0.0;   ///< max_K (relative residual − 𝒟_K)
    double total_dissipation = 0.0;         ///< Σ|K||𝒟_K|
};

struct AuditParams {
    double lipschitz = 1.0;  ///< the L_g used for the step
    double zeta = 0.1;
    double eta_low = 0.0;    ///< η̲ of the declared box; 0 turns 𝒟_K off
};

/// Evaluates r_K, 𝒟_K and, with a target, h(u^{n+1},v) − h(u^n,v) + Δt/|K| Σ|e|𝒢_{H₀}.
/// Wall faces are treated as interfaces with their mirror ghost.
StepAudit audit_step(const Mesh& mesh, const NumericalFlux& flux, const SolverState& before,
                     const SolverState& after, const StepTrace& trace, double dt, const AuditParams& params,
                     const StationaryField* target = nullptr);

/// 𝒢_{H₀} = G − H₀·g for the K-view.
double shifted_entropy_flux(const NumericalFlux& flux, const State& h0, const State& uk, double ak,
                            const State& ul, double al, const Normal& n);

/// V = Σ|K| h(u_K, v_K, α_K)
double lyapunov(const Model& model, const Mesh& mesh, const SolverState& state, const StationaryField& target);

/// |V − (Σ|K|η(u) − Σ|K|η(v) − H₀·Σ|K|(u − v))| / max(1, Σ|K||η(u)|)
double lyapunov_identity_defect(const Model& model, const Mesh& mesh, const SolverState& state,
                                const StationaryField& target);

/// Σ_K |K| u_K^(k) for every component.
std::vector<double> component_totals(const Mesh& mesh, const SolverState& state);

/// Relative mismatch of Σ|K|u⁰ and Σ|K|v over the conserved components (largest one).
double compatibility_defect(const Model& model, const Mesh& mesh, const SolverState& initial,
                            const StationaryField& target);

struct LfEstimate {
    double lf = 0.0;
    double sup_quotient = 0.0;
    std::size_t used = 0;  ///< samples with h ≥ h_floor
};

inline constexpr double kLfMargin = 0.1;
inline constexpr double kLfFloor = 1e-12;

/// L_f = (1 + margin)·sup |ΔF·n − H₀·Δf·n| / h(u,v,α), sampling u in the box, α in box.alpha and
/// v the family's state at α.
LfEstimate estimate_lf(const Model& model, const FamilyData& family, const PrimitiveBox& box,
                       std::size_t samples = 20000, std::uint64_t seed = 1);

struct ConeCheck {
    double inner = 0.0;  ///< Σ_{K ⊂ B(x₀,R)} |K| h(u^n)
    double outer = 0.0;  ///< Σ_{K ∩ B(x₀,R + L_f t + 2h) ≠ ∅} |K| h(u⁰)
    double tolerance = 0.0;
    double radius = 0.0;  ///< R + L_f t + 2h
    bool holds = true;
};

/// Discrete stability cone at one time. Throws DomainError when the outer ball leaves the
/// mesh bounding box.
ConeCheck stability_cone_check(const Model& model, const Mesh& mesh, const SolverState& initial,
                               const SolverState& current, const StationaryField& target, const Point& center,
                               double radius, double lf);

struct ConvergenceReport {
    double v0 = 0.0;
    double v_final = 0.0;
    double rate = 0.0;  ///< fitted V^{n+1}/V^n over the final half; 0 when V vanishes
    double max_surface_deviation = 0.0;  ///< SW: max|h+α − Z₀|
    double max_velocity = 0.0;           ///< SW: max|U|
    long steps = 0;
    bool passed = false;
};

struct ConvergenceThresholds {
    double v_ratio = 1e-10;
    double surface = 1e-6;  ///< relative to Z₀
    double velocity = 1e-6;
};

/// Summarises a V series and the final state. `z0` is the lake level (ignored for gas models).
ConvergenceReport steady_convergence_report(const Model& model, const std::vector<double>& v_series,
                                            const SolverState& final_state, double z0,
                                            const ConvergenceThresholds& thresholds = {});

struct DiagnosticsRecord {
    long step = 0;
    double time = 0.0;
    double dt = 0.0;
    std::vector<double> totals;
    double total_entropy = 0.0;
    double lyapunov = 0.0;
    double worst_residual = 0.0;
    double total_dissipation = 0.0;
    double max_stationarity_residual = 0.0;
    double worst_relative_residual = 0.0;
    double lipschitz = 0.0;
};

/// Writes `step,time,dt,mass0[,mass1,...],total_entropy,lyapunov_V,worst_residual,total_dissipation,
/// max_stationarity_residual` with 17 significant digits.
class DiagnosticsWriter {
public:
    DiagnosticsWriter(std::ostream& out, int components);
    void write(const DiagnosticsRecord& record);

private:
    std::ostream& out_;
    int components_;
};

std::string diagnostics_header(int components);

}  // namespace ncbal
