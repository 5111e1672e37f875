#pragma once

#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ncbal/fluxes.hpp"
#include "ncbal/mesh.hpp"

namespace ncbal {

enum class CflMode { Basic, Strengthened };

/// basic: min_K |K|/(L_g|∂K|); strengthened: min(basic, (1−ζ)(η̲/η̄)a²h/L_g).
double cfl_timestep(const Mesh& mesh, double lipschitz, CflMode mode, double zeta = 0.1,
                    const std::optional<HessianBounds>& bounds = std::nullopt);

struct SolverState {
    long step = 0;
    double time = 0.0;
    std::vector<State> u;
    std::vector<double> alpha;  ///< frozen for the whole run
};

/// Mirror ghosts, one per face: the reflected state on wall faces, std::nullopt elsewhere.
std::vector<std::optional<State>> apply_mirror_boundary(const SolverState& state, const Mesh& mesh, const Model& model);

/// Global L_g = kLipschitzSafety · max over all interface pairs (mirror pairs included) of λ.
double global_lipschitz(const NumericalFlux& flux, const Mesh& mesh, const SolverState& state);

/// Per-face flux evaluations of one step, indexed like Mesh::faces(). For wall faces the
/// right-hand state is the mirror ghost.
struct StepTrace {
    std::vector<FaceFlux> faces;
    std::vector<State> right_states;  ///< neighbour or ghost state seen from the face's left cell
    std::vector<double> right_alpha;
};

struct StepOptions {
    int threads = 1;
    /// Recompute every cell through the convex combination of 𝒰 values and compare.
    bool check_convex_combination = false;
    /// Abort when a cell leaves this box.
    const PrimitiveBox* box = nullptr;
};

/// One explicit step u_K ← u_K − Δt/|K| Σ |e| g. Throws NumericalAbort (with the new step
/// index and cell) when a cell becomes inadmissible, non-finite or leaves the box.
SolverState step(const SolverState& state, const Mesh& mesh, const NumericalFlux& flux, double dt,
                 const StepOptions& options = {}, StepTrace* trace = nullptr);

/// Snapshot CSV: `cell_id,x,y,area,alpha,u0,u1[,u2]`, 17 significant digits.
void write_snapshot(std::ostream& out, const Mesh& mesh, const SolverState& state);

}  // namespace ncbal
