#include "ncbal/solver.hpp"

#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "ncbal/errors.hpp"

namespace ncbal {

double cfl_timestep(const Mesh& mesh, double lipschitz, CflMode mode, double zeta,
                    const std::optional<HessianBounds>& bounds) {
    if (!(lipschitz > 0.0) || !std::isfinite(lipschitz)) throw DomainError("cfl_timestep: L_g must be positive");
    double dt = HUGE_VAL;
    for (const auto& cell : mesh.cells()) dt = std::min(dt, cell.measure / (lipschitz * cell.perimeter));
    if (mode == CflMode::Strengthened) {
        if (!bounds) throw ConfigError("strengthened CFL requires Hessian bounds");
        if (!(zeta > 0.0 && zeta < 1.0)) throw ConfigError("strengthened CFL requires 0 < zeta < 1");
        const double a = mesh.regularity();
        dt = std::min(dt, (1.0 - zeta) * (bounds->low / bounds->high) * a * a * mesh.size() / lipschitz);
    }
    return dt;
}

std::vector<std::optional<State>> apply_mirror_boundary(const SolverState& state, const Mesh& mesh, const Model& model) {
    std::vector<std::optional<State>> ghosts(mesh.faces().size());
    for (std::size_t f = 0; f < mesh.faces().size(); ++f) {
        const Face& face = mesh.faces()[f];
        if (face.is_wall()) ghosts[f] = model.reflect(state.u[face.left], face.normal);
    }
    return ghosts;
}

namespace {

// Runs fn(i) for i in [0, count) on up to `threads` workers; rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    if (threads <= 1 || count < 64) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(threads, count);
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w * count / workers; i < (w + 1) * count / workers; ++i) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

struct Neighbour {
    State u;
    double alpha;
};

Neighbour right_state(const SolverState& s, const Mesh& mesh, const Model& model, std::size_t f) {
    const Face& face = mesh.faces()[f];
    if (face.is_wall()) return {model.reflect(s.u[face.left], face.normal), s.alpha[face.left]};
    return {s.u[face.right], s.alpha[face.right]};
}

}  // namespace

double global_lipschitz(const NumericalFlux& flux, const Mesh& mesh, const SolverState& state) {
    double lambda = 0.0;
    for (std::size_t f = 0; f < mesh.faces().size(); ++f) {
        const Face& face = mesh.faces()[f];
        const Neighbour r = right_state(state, mesh, flux.model(), f);
        lambda = std::max(lambda, flux.wave_speed(state.u[face.left], state.alpha[face.left], r.u, r.alpha, face.normal));
    }
    return kLipschitzSafety * lambda;
}

SolverState step(const SolverState& state, const Mesh& mesh, const NumericalFlux& flux, double dt,
                 const StepOptions& options, StepTrace* trace) {
    const Model& model = flux.model();
    const std::size_t nf = mesh.faces().size();
    if (state.u.size() != mesh.cell_count() || state.alpha.size() != mesh.cell_count())
        throw DomainError("step: state does not match the mesh");

    StepTrace local;
    StepTrace& tr = trace ? *trace : local;
    tr.faces.assign(nf, FaceFlux{});
    tr.right_states.assign(nf, State());
    tr.right_alpha.assign(nf, 0.0);

    const long next = state.step + 1;
    parallel_for(nf, options.threads, [&](std::size_t f) {
        const Face& face = mesh.faces()[f];
        Neighbour r = right_state(state, mesh, model, f);
        try {
            tr.faces[f] = flux.evaluate(state.u[face.left], state.alpha[face.left], r.u, r.alpha, face.normal);
        } catch (const DomainError& err) {
            throw NumericalAbort(std::string("flux evaluation failed: ") + err.what(), next, face.left);
        }
        tr.right_states[f] = std::move(r.u);
        tr.right_alpha[f] = r.alpha;
    });

    SolverState out;
    out.step = next;
    out.time = state.time + dt;
    out.alpha = state.alpha;
    out.u.resize(mesh.cell_count());
    for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
        const Cell& cell = mesh.cells()[k];
        State sum = State::Zero(model.components());
        for (const FaceRef& ref : cell.faces) {
            const FaceFlux& ff = tr.faces[ref.face];
            sum += mesh.faces()[ref.face].measure * (ref.sign > 0 ? ff.k_view : ff.l_view);
        }
        out.u[k] = state.u[k] - (dt / cell.measure) * sum;
    }

    if (options.check_convex_combination) {
        for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
            const Cell& cell = mesh.cells()[k];
            const double nu = dt * cell.perimeter / cell.measure;
            State combo = State::Zero(model.components());
            for (std::size_t j = 0; j < cell.faces.size(); ++j) {
                const FaceRef ref = cell.faces[j];
                const Face& face = mesh.faces()[ref.face];
                const Normal n = mesh.outward_normal(static_cast<int>(k), static_cast<int>(j));
                State ul;
                double al;
                if (ref.sign > 0) {
                    ul = tr.right_states[ref.face];
                    al = tr.right_alpha[ref.face];
                } else {
                    ul = state.u[face.left];
                    al = state.alpha[face.left];
                }
                const State w = intermediate_state(flux, state.u[k], state.alpha[k], ul, al, n, nu);
                combo += (face.measure / cell.perimeter) * w;
            }
            const double defect = (combo - out.u[k]).cwiseAbs().maxCoeff();
            if (defect > 1e-12 * tolerance_scale(out.u[k])) {
                std::ostringstream msg;
                msg << "convex-combination reassembly differs from the update by " << defect;
                throw NumericalAbort(msg.str(), next, static_cast<int>(k));
            }
        }
    }

    for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
        const int cell = static_cast<int>(k);
        if (!out.u[k].allFinite()) throw NumericalAbort("non-finite state", next, cell);
        try {
            model.check_admissible(out.u[k], out.alpha[k]);
        } catch (const DomainError& err) {
            throw NumericalAbort(std::string("state left the admissible set: ") + err.what(), next, cell);
        }
        if (options.box && !options.box->contains(model, out.u[k], out.alpha[k])) {
            std::ostringstream msg;
            const State prim = model.to_primitive(out.u[k], out.alpha[k]);
            msg.precision(17);
            msg << "state left the declared box " << format_box(model, *options.box) << ": primitive (";
            for (int i = 0; i < prim.size(); ++i) msg << (i ? ", " : "") << prim[i];
            msg << "), alpha " << out.alpha[k];
            throw NumericalAbort(msg.str(), next, cell);
        }
    }
    return out;
}

void write_snapshot(std::ostream& out, const Mesh& mesh, const SolverState& state) {
    const int n = state.u.empty() ? 0 : static_cast<int>(state.u.front().size());
    std::ostringstream buf;
    buf.precision(17);
    buf << "cell_id,x,y,area,alpha";
    for (int i = 0; i < n; ++i) buf << ",u" << i;
    buf << '\n';
    for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
        const Cell& c = mesh.cells()[k];
        buf << k << ',' << c.centroid.x() << ',' << c.centroid.y() << ',' << c.measure << ',' << state.alpha[k];
        for (int i = 0; i < n; ++i) buf << ',' << state.u[k][i];
        buf << '\n';
    }
    out << buf.str();
}

}  // namespace ncbal
