#include "ncbal/diagnostics.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "ncbal/errors.hpp"

namespace ncbal {

namespace {

// Neighbour state, G and g as seen from `cell` through its local face `j`.
struct CellView {
    const State* neighbour;
    double neighbour_alpha;
    const State* g;
    double entropy;
    Normal n;
};

CellView view_of(const Mesh& mesh, const SolverState& s, const StepTrace& trace, int cell, int j) {
    const FaceRef ref = mesh.cells()[cell].faces[j];
    const Face& face = mesh.faces()[ref.face];
    const FaceFlux& ff = trace.faces[ref.face];
    const Normal n = mesh.outward_normal(cell, j);
    if (ref.sign > 0)
        return {&trace.right_states[ref.face], trace.right_alpha[ref.face], &ff.k_view, ff.entropy, n};
    return {&s.u[face.left], s.alpha[face.left], &ff.l_view, -ff.entropy, n};
}

}  // namespace

StepAudit audit_step(const Mesh& mesh, const NumericalFlux& flux, const SolverState& before,
                     const SolverState& after, const StepTrace& trace, double dt, const AuditParams& params,
                     const StationaryField* target) {
    const Model& model = flux.model();
    const std::size_t n = mesh.cell_count();
    if (before.u.size() != n || after.u.size() != n || trace.faces.size() != mesh.faces().size())
        throw DomainError("audit_step: states and trace do not match the mesh");
    if (target && target->states.size() != n) throw DomainError("audit_step: target does not match the mesh");

    StepAudit audit;
    audit.residual.resize(n);
    audit.bound.resize(n);
    if (target) audit.relative_residual.resize(n);
    audit.worst_residual = -HUGE_VAL;
    audit.worst_relative_residual = target ? -HUGE_VAL : 0.0;

    for (std::size_t k = 0; k < n; ++k) {
        const Cell& cell = mesh.cells()[k];
        const State& uk = before.u[k];
        const double ak = before.alpha[k];
        double entropy_sum = 0.0, shifted_sum = 0.0, dissipation_sum = 0.0;
        for (std::size_t j = 0; j < cell.faces.size(); ++j) {
            const CellView v = view_of(mesh, before, trace, static_cast<int>(k), static_cast<int>(j));
            const double e = mesh.faces()[cell.faces[j].face].measure;
            entropy_sum += e * v.entropy;
            if (target) shifted_sum += e * (v.entropy - target->h0.dot(*v.g));
            dissipation_sum += e * (*v.g - model.flux(uk, ak, v.n)).squaredNorm();
        }
        const double ratio = dt / cell.measure;
        audit.residual[k] = model.entropy(after.u[k], ak) - model.entropy(uk, ak) + ratio * entropy_sum;
        audit.bound[k] = -params.zeta * params.eta_low * ratio / (2.0 * params.lipschitz) * dissipation_sum;
        audit.worst_residual = std::max(audit.worst_residual, audit.residual[k] - audit.bound[k]);
        audit.total_dissipation += cell.measure * std::abs(audit.bound[k]);
        if (target) {
            const State& vk = target->states[k];
            audit.relative_residual[k] = model.relative_entropy(after.u[k], vk, ak) -
                                         model.relative_entropy(uk, vk, ak) + ratio * shifted_sum;
            audit.worst_relative_residual =
                std::max(audit.worst_relative_residual, audit.relative_residual[k] - audit.bound[k]);
        }
    }
    if (n == 0) audit.worst_residual = 0.0;
    return audit;
}

double shifted_entropy_flux(const NumericalFlux& flux, const State& h0, const State& uk, double ak,
                            const State& ul, double al, const Normal& n) {
    const FaceFlux f = flux.evaluate(uk, ak, ul, al, n);
    return f.entropy - h0.dot(f.k_view);
}

double lyapunov(const Model& model, const Mesh& mesh, const SolverState& state, const StationaryField& target) {
    double v = 0.0;
    for (std::size_t k = 0; k < mesh.cell_count(); ++k)
        v += mesh.cells()[k].measure * model.relative_entropy(state.u[k], target.states[k], state.alpha[k]);
    return v;
}

double lyapunov_identity_defect(const Model& model, const Mesh& mesh, const SolverState& state,
                                const StationaryField& target) {
    double eta_u = 0.0, eta_v = 0.0, scale = 0.0;
    State diff = State::Zero(model.components());
    for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
        const double m = mesh.cells()[k].measure;
        const double e = model.entropy(state.u[k], state.alpha[k]);
        eta_u += m * e;
        eta_v += m * model.entropy(target.states[k], state.alpha[k]);
        diff += m * (state.u[k] - target.states[k]);
        scale += m * std::abs(e);
    }
    const double assembled = eta_u - eta_v - target.h0.dot(diff);
    return std::abs(lyapunov(model, mesh, state, target) - assembled) / std::max(1.0, scale);
}

std::vector<double> component_totals(const Mesh& mesh, const SolverState& state) {
    const int nc = state.u.empty() ? 0 : static_cast<int>(state.u.front().size());
    std::vector<double> totals(nc, 0.0);
    for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
        for (int i = 0; i < nc; ++i) totals[i] += mesh.cells()[k].measure * state.u[k][i];
    }
    return totals;
}

double compatibility_defect(const Model& model, const Mesh& mesh, const SolverState& initial,
                            const StationaryField& target) {
    const std::vector<bool> conserved = model.conserved_components();
    const std::vector<double> tu = component_totals(mesh, initial);
    SolverState vs;
    vs.u = target.states;
    const std::vector<double> tv = component_totals(mesh, vs);
    // Normalised by the largest conserved total so that components at rest compare absolutely.
    double scale = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < conserved.size(); ++i) {
        if (conserved[i]) scale = std::max({scale, std::abs(tu[i]), std::abs(tv[i])});
    }
    if (scale == 0.0) return 0.0;
    for (std::size_t i = 0; i < conserved.size(); ++i) {
        if (conserved[i]) worst = std::max(worst, std::abs(tu[i] - tv[i]) / scale);
    }
    return worst;
}

LfEstimate estimate_lf(const Model& model, const FamilyData& family, const PrimitiveBox& box, std::size_t samples,
                       std::uint64_t seed) {
    if (box.ranges.size() != static_cast<std::size_t>(model.components()))
        throw ConfigError("estimate_lf: box does not match the model");
    for (const Interval& r : box.ranges) {
        if (!(r.lo <= r.hi)) throw ConfigError("estimate_lf: empty box");
    }
    if (!(box.alpha.lo <= box.alpha.hi)) throw ConfigError("estimate_lf: empty alpha range");
    if (samples == 0) throw ConfigError("estimate_lf: samples must be positive");

    std::mt19937_64 rng(seed);
    auto draw = [&](double lo, double hi) {
        return hi > lo ? std::uniform_real_distribution<double>(lo, hi)(rng) : lo;
    };
    LfEstimate est;
    for (std::size_t s = 0; s < samples; ++s) {
        State prim(model.components());
        for (int i = 0; i < prim.size(); ++i) prim[i] = draw(box.ranges[i].lo, box.ranges[i].hi);
        const double alpha = draw(box.alpha.lo, box.alpha.hi);
        Normal n(1.0, 0.0);
        if (model.dimension() == 1) {
            if (draw(0.0, 1.0) < 0.5) n = -n;
        } else {
            const double t = draw(0.0, 2.0 * M_PI);
            n = Normal(std::cos(t), std::sin(t));
        }
        const State u = model.from_primitive(prim, alpha);
        const State v = stationary_point(model, family, alpha);
        const State h0 = model.entropy_gradient(v, alpha);
        const double h = model.relative_entropy(u, v, alpha);
        if (h < kLfFloor) continue;
        const double num = (model.entropy_flux(u, alpha, n) - h0.dot(model.flux(u, alpha, n))) -
                           (model.entropy_flux(v, alpha, n) - h0.dot(model.flux(v, alpha, n)));
        est.sup_quotient = std::max(est.sup_quotient, std::abs(num) / h);
        ++est.used;
    }
    if (est.used == 0) throw DomainError("estimate_lf: every sample fell below the h floor");
    est.lf = (1.0 + kLfMargin) * est.sup_quotient;
    return est;
}

namespace {

double distance_to_segment(const Point& p, const Point& a, const Point& b) {
    const Point ab = b - a;
    const double len2 = ab.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + t * ab)).norm();
}

double distance_to_cell(const Mesh& mesh, const Cell& cell, const Point& p) {
    const auto& nodes = mesh.nodes();
    if (mesh.dimension() == 1) {
        const double a = std::min(nodes[cell.nodes[0]].x(), nodes[cell.nodes[1]].x());
        const double b = std::max(nodes[cell.nodes[0]].x(), nodes[cell.nodes[1]].x());
        return std::max({0.0, a - p.x(), p.x() - b});
    }
    const std::size_t m = cell.nodes.size();
    bool inside = true;
    double dist = HUGE_VAL;
    for (std::size_t i = 0; i < m; ++i) {
        const Point& a = nodes[cell.nodes[i]];
        const Point& b = nodes[cell.nodes[(i + 1) % m]];
        const Point e = b - a, w = p - a;
        if (e.x() * w.y() - e.y() * w.x() < 0.0) inside = false;
        dist = std::min(dist, distance_to_segment(p, a, b));
    }
    return inside ? 0.0 : dist;
}

bool cell_inside_ball(const Mesh& mesh, const Cell& cell, const Point& center, double radius) {
    for (int node : cell.nodes) {
        if ((mesh.nodes()[node] - center).norm() > radius) return false;
    }
    return true;
}

}  // namespace

ConeCheck stability_cone_check(const Model& model, const Mesh& mesh, const SolverState& initial,
                               const SolverState& current, const StationaryField& target, const Point& center,
                               double radius, double lf) {
    ConeCheck check;
    check.radius = radius + lf * current.time + 2.0 * mesh.size();
    const Point lo = mesh.lower_corner(), hi = mesh.upper_corner();
    bool inside = center.x() - check.radius >= lo.x() && center.x() + check.radius <= hi.x();
    if (mesh.dimension() == 2)
        inside = inside && center.y() - check.radius >= lo.y() && center.y() + check.radius <= hi.y();
    if (!inside) throw DomainError("stability cone leaves the domain at t = " + std::to_string(current.time));

    double v0 = 0.0;
    for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
        const Cell& cell = mesh.cells()[k];
        const double h0 = model.relative_entropy(initial.u[k], target.states[k], initial.alpha[k]);
        v0 += cell.measure * h0;
        if (cell_inside_ball(mesh, cell, center, radius))
            check.inner +=
                cell.measure * model.relative_entropy(current.u[k], target.states[k], current.alpha[k]);
        if (distance_to_cell(mesh, cell, center) <= check.radius) check.outer += cell.measure * h0;
    }
    check.tolerance = 1e-10 * v0;
    check.holds = check.inner <= check.outer + check.tolerance;
    return check;
}

ConvergenceReport steady_convergence_report(const Model& model, const std::vector<double>& v_series,
                                            const SolverState& final_state, double z0,
                                            const ConvergenceThresholds& thresholds) {
    ConvergenceReport r;
    if (!v_series.empty()) {
        r.v0 = v_series.front();
        r.v_final = v_series.back();
        r.steps = static_cast<long>(v_series.size()) - 1;
    }
    // Least squares of log V against the step index over the final half.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (std::size_t i = v_series.size() / 2; i < v_series.size(); ++i) {
        if (!(v_series[i] > 0.0)) continue;
        const double x = static_cast<double>(i), y = std::log(v_series[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    if (count >= 2) {
        const double denom = count * sxx - sx * sx;
        if (denom > 0.0) r.rate = std::exp((count * sxy - sx * sy) / denom);
    }

    const bool shallow = model.kind() == ModelKind::ShallowWater1D || model.kind() == ModelKind::ShallowWater2D;
    for (std::size_t k = 0; k < final_state.u.size(); ++k) {
        const State prim = model.to_primitive(final_state.u[k], final_state.alpha[k]);
        if (shallow) {
            r.max_surface_deviation = std::max(r.max_surface_deviation, std::abs(prim[0] + final_state.alpha[k] - z0));
            r.max_velocity = std::max(r.max_velocity, prim.tail(prim.size() - 1).norm());
        } else {
            r.max_velocity = std::max(r.max_velocity, std::abs(prim[1]));
        }
    }
    const bool v_ok = r.v0 == 0.0 ? r.v_final == 0.0 : r.v_final <= thresholds.v_ratio * r.v0;
    r.passed = v_ok && r.max_velocity <= thresholds.velocity &&
               (!shallow || r.max_surface_deviation <= thresholds.surface * std::abs(z0));
    return r;
}

std::string diagnostics_header(int components) {
    std::string h = "step,time,dt";
    for (int i = 0; i < components; ++i) h += ",mass" + std::to_string(i);
    h += ",total_entropy,lyapunov_V,worst_residual,total_dissipation,max_stationarity_residual";
    return h;
}

DiagnosticsWriter::DiagnosticsWriter(std::ostream& out, int components) : out_(out), components_(components) {
    out_ << diagnostics_header(components) << '\n';
}

void DiagnosticsWriter::write(const DiagnosticsRecord& r) {
    if (static_cast<int>(r.totals.size()) != components_)
        throw DomainError("diagnostics record has the wrong number of totals");
    std::ostringstream line;
    line.precision(17);
    line << r.step << ',' << r.time << ',' << r.dt;
    for (double t : r.totals) line << ',' << t;
    line << ',' << r.total_entropy << ',' << r.lyapunov << ',' << r.worst_residual << ',' << r.total_dissipation
         << ',' << r.max_stationarity_residual << '\n';
    out_ << line.str();
}

}  // namespace ncbal
