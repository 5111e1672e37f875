#include "ncbal/fluxes.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "ncbal/errors.hpp"

namespace ncbal {

double NumericalFlux::wave_speed(const State& uk, double ak, const State& ul, double al, const Normal& n) const {
    return std::max(model_->max_wave_speed(uk, ak, n), model_->max_wave_speed(ul, al, n));
}

namespace {

bool is_shallow_water(const Model& m) {
    return m.kind() == ModelKind::ShallowWater1D || m.kind() == ModelKind::ShallowWater2D;
}

class Rusanov final : public NumericalFlux {
public:
    explicit Rusanov(ModelPtr model) : NumericalFlux(std::move(model)) {}

    std::string_view name() const override { return "rusanov"; }

    FaceFlux evaluate(const State& uk, double ak, const State& ul, double al, const Normal& n) const override {
        const double lambda = wave_speed(uk, ak, ul, al, n);
        FaceFlux out;
        out.k_view = 0.5 * (model_->flux(uk, ak, n) + model_->flux(ul, al, n)) - 0.5 * lambda * (ul - uk);
        out.l_view = -out.k_view;
        out.entropy = 0.5 * (model_->entropy_flux(uk, ak, n) + model_->entropy_flux(ul, al, n)) -
                      0.5 * lambda * (model_->entropy(ul, al) - model_->entropy(uk, ak));
        return out;
    }
};

// Hydrostatic reconstruction: both states are lowered to the common bottom α* = max(α_K, α_L),
// the Rusanov flux is applied there, and each side recovers its own hydrostatic pressure.
class Hydrostatic final : public NumericalFlux {
public:
    explicit Hydrostatic(ModelPtr model) : NumericalFlux(std::move(model)) {
        if (!is_shallow_water(*model_)) throw ConfigError("hydrostatic flux requires a shallow water model");
    }

    std::string_view name() const override { return "hydrostatic"; }

    FaceFlux evaluate(const State& uk, double ak, const State& ul, double al, const Normal& n) const override {
        model_->check_admissible(uk, ak);
        model_->check_admissible(ul, al);
        const double lambda = wave_speed(uk, ak, ul, al, n);
        const double astar = std::max(ak, al);
        const State sk = reconstruct(uk, ak, astar);
        const State sl = reconstruct(ul, al, astar);
        const double g = model_->params().gravity;
        const int d = model_->dimension();

        const State central = 0.5 * (model_->flux(sk, astar, n) + model_->flux(sl, astar, n));
        FaceFlux out;
        out.k_view = central - 0.5 * lambda * (sl - sk);
        out.l_view = -central - 0.5 * lambda * (sk - sl);
        const double pk = 0.5 * g * (uk[0] * uk[0] - sk[0] * sk[0]);
        const double pl = 0.5 * g * (ul[0] * ul[0] - sl[0] * sl[0]);
        for (int i = 0; i < d; ++i) {
            out.k_view[1 + i] += pk * n[i];
            out.l_view[1 + i] -= pl * n[i];
        }
        out.entropy = 0.5 * (model_->entropy_flux(sk, astar, n) + model_->entropy_flux(sl, astar, n)) -
                      0.5 * lambda * (model_->entropy(sl, astar) - model_->entropy(sk, astar));
        return out;
    }

private:
    State reconstruct(const State& u, double alpha, double astar) const {
        if (alpha == astar) return u;
        const double h = std::max(0.0, u[0] + alpha - astar);
        if (!(h >= kMinDepth)) {
            std::ostringstream msg;
            msg << "hydrostatic reconstruction: reconstructed depth " << h << " below h_min (h = " << u[0]
                << ", alpha = " << alpha << ", alpha* = " << astar << ")";
            throw DomainError(msg.str());
        }
        State s = u * (h / u[0]);
        s[0] = h;
        return s;
    }
};

// Acoustic solver for the Lagrangian system in the variables (U, P = p − α). The impedance
// follows the Suliciu relaxation speeds of Bouchut (ideal gas, coefficient (γ+1)/2), taking the
// larger of the two one-sided values; constant (U, P) pairs are reproduced exactly.
class Acoustic final : public NumericalFlux {
public:
    explicit Acoustic(ModelPtr model) : NumericalFlux(std::move(model)) {
        if (model_->kind() != ModelKind::Lagrangian1D) throw ConfigError("acoustic flux requires the lagrangian model");
    }

    std::string_view name() const override { return "acoustic"; }

    double wave_speed(const State& uk, double ak, const State& ul, double al, const Normal& n) const override {
        return impedance(side(uk, ak, n), side(ul, al, n));
    }

    FaceFlux evaluate(const State& uk, double ak, const State& ul, double al, const Normal& n) const override {
        // Work in the frame where K sits on the left of the interface.
        const Side left = side(uk, ak, n);
        const Side right = side(ul, al, n);
        const double c = impedance(left, right);
        const double nx = n.x();
        const double ustar = 0.5 * (left.vel + right.vel) - 0.5 / c * (right.p - left.p);
        const double pstar = 0.5 * (left.p + right.p) - 0.5 * c * (right.vel - left.vel);
        FaceFlux out;
        out.k_view = State(3);
        // Velocities were projected on n, so U* n recovers the physical value.
        out.k_view << -ustar, pstar * nx, pstar * ustar;
        out.l_view = -out.k_view;
        out.entropy = 0.0;
        return out;
    }

private:
    struct Side {
        double vel;    ///< U·n seen from the side
        double p;      ///< reduced pressure p − α
        double speed;  ///< Lagrangian sound speed ρc
    };

    Side side(const State& u, double alpha, const Normal& n) const {
        const State prim = model_->to_primitive(u, alpha);
        const double p = (model_->params().gamma - 1.0) * prim[2] / prim[0];
        return {prim[1] * n.x(), p - alpha, std::sqrt(model_->params().gamma * p / prim[0])};
    }

    double impedance(const Side& l, const Side& r) const {
        const double a = 0.5 * (model_->params().gamma + 1.0);
        const double compress = l.vel - r.vel;
        double cl = l.speed, cr = r.speed;
        if (r.p - l.p >= 0.0) {
            cl = l.speed + a * std::max(0.0, (r.p - l.p) / l.speed + compress);
            cr = r.speed + a * std::max(0.0, (l.p - r.p) / cl + compress);
        } else {
            cr = r.speed + a * std::max(0.0, (l.p - r.p) / r.speed + compress);
            cl = l.speed + a * std::max(0.0, (r.p - l.p) / cr + compress);
        }
        return std::max(cl, cr);
    }
};

}  // namespace

FluxPtr make_rusanov(ModelPtr model) { return std::make_shared<Rusanov>(std::move(model)); }
FluxPtr make_hydrostatic(ModelPtr model) { return std::make_shared<Hydrostatic>(std::move(model)); }
FluxPtr make_acoustic(ModelPtr model) { return std::make_shared<Acoustic>(std::move(model)); }

FluxPtr make_flux(std::string_view name, ModelPtr model) {
    if (name == "rusanov") return make_rusanov(std::move(model));
    if (name == "hydrostatic") return make_hydrostatic(std::move(model));
    if (name == "acoustic") return make_acoustic(std::move(model));
    throw ConfigError("unknown flux '" + std::string(name) + "' (expected rusanov, hydrostatic, acoustic)");
}

State intermediate_state(const NumericalFlux& flux, const State& uk, double ak, const State& ul, double al,
                         const Normal& n, double nu) {
    const State g = flux.evaluate(uk, ak, ul, al, n).k_view;
    return uk - nu * (g - flux.model().flux(uk, ak, n));
}

double tadmor_gamma(const NumericalFlux& flux, const State& uk, double ak, const State& ul, double al,
                    const Normal& n) {
    const Model& m = flux.model();
    const State g = flux.evaluate(uk, ak, ul, al, n).k_view;
    return m.entropy_flux(uk, ak, n) + m.entropy_gradient(uk, ak).dot(g - m.flux(uk, ak, n));
}

double positivity_margin(const Model& model, const State& u, double alpha) {
    const State prim = model.to_primitive(u, alpha);
    if (model.kind() == ModelKind::ShallowWater1D || model.kind() == ModelKind::ShallowWater2D) return prim[0];
    return std::min(prim[0], prim[2]);
}

// ---------------------------------------------------------------------------
// Contract harness

const ContractRow* ContractReport::find(std::string_view name) const {
    for (const auto& row : rows) {
        if (row.name == name) return &row;
    }
    return nullptr;
}

bool ContractReport::passed() const {
    for (const auto& row : rows) {
        if (row.status == "fail") return false;
    }
    return true;
}

std::string ContractReport::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "# flux=" << flux << " model=" << model << " box=" << box << " samples=" << samples << " seed=" << seed
        << " eta_low=" << eta_low << '\n';
    out << "contract,status,samples,violations,worst,tolerance,witness_index,witness\n";
    for (const auto& r : rows) {
        out << r.name << ',' << r.status << ',' << r.samples << ',' << r.violations << ',' << r.worst << ','
            << r.tolerance << ',' << r.witness << ',' << r.witness_text << '\n';
    }
    out << "# overall=" << (passed() ? "pass" : "fail") << '\n';
    return out.str();
}

namespace {

std::string describe(const State& uk, double ak, const State& ul, double al, const Normal& n, int dim, double nu) {
    std::ostringstream out;
    out.precision(17);
    auto vec = [&out](const State& v) {
        out << '(';
        for (int i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
        out << ')';
    };
    out << "uK=";
    vec(uk);
    out << " aK=" << ak << " uL=";
    vec(ul);
    out << " aL=" << al << " n=(" << n.x();
    if (dim == 2) out << ' ' << n.y();
    out << ')';
    if (nu > 0.0) out << " nu=" << nu;
    return out.str();
}

struct Tracker {
    ContractRow row;
    bool requested = true;

    Tracker(std::string name, double tolerance, bool req) : requested(req) {
        row.name = std::move(name);
        row.tolerance = tolerance;
    }
    // `defect` is the raw violation measure; the sample fails when it exceeds `allowed`.
    void record(double defect, double allowed, long index, const std::string& witness) {
        ++row.samples;
        if (defect > allowed) ++row.violations;
        if (row.witness < 0 || defect > row.worst) {
            row.worst = defect;
            row.witness = index;
            row.witness_text = witness;
        }
    }
    ContractRow finish() {
        if (row.samples == 0) {
            row.status = "info";
            row.witness_text = "no samples";
        } else if (!requested) {
            row.status = "info";
        } else {
            row.status = row.violations == 0 ? "pass" : "fail";
        }
        return row;
    }
};

class Sampler {
public:
    Sampler(const Model& model, const PrimitiveBox& box, std::uint64_t seed) : model_(model), box_(box), rng_(seed) {}

    double uniform(const Interval& iv) {
        if (iv.width() == 0.0) return iv.lo;
        return std::uniform_real_distribution<double>(iv.lo, iv.hi)(rng_);
    }
    State primitive() {
        State prim(model_.components());
        for (int i = 0; i < prim.size(); ++i) prim[i] = uniform(box_.ranges[i]);
        return prim;
    }
    State state(double alpha) { return model_.from_primitive(primitive(), alpha); }
    Normal normal() {
        if (model_.dimension() == 1) return Normal(std::bernoulli_distribution(0.5)(rng_) ? 1.0 : -1.0, 0.0);
        const double theta = std::uniform_real_distribution<double>(0.0, 2.0 * M_PI)(rng_);
        return Normal(std::cos(theta), std::sin(theta));
    }

    // A pair of stationary states of the model's family at α_K, α_L.
    std::optional<std::pair<State, State>> stationary_pair(double ak, double al) {
        const State prim = primitive();
        FamilyData family;
        switch (model_.kind()) {
            case ModelKind::ShallowWater1D:
            case ModelKind::ShallowWater2D:
                family = LakeAtRest{std::max(ak, al) + prim[0]};
                break;
            case ModelKind::PorousEuler1D: {
                const double e = prim[2];
                family = RestingGas{e / model_.params().cv, (model_.params().gamma - 1.0) * prim[0] * e};
                break;
            }
            case ModelKind::Lagrangian1D: {
                const double p = (model_.params().gamma - 1.0) * prim[2] / prim[0];
                family = HydrostaticColumn{prim[1], p - ak, prim[2] / model_.params().cv};
                break;
            }
        }
        try {
            return std::pair{stationary_point(model_, family, ak), stationary_point(model_, family, al)};
        } catch (const DomainError&) {
            return std::nullopt;
        }
    }

private:
    const Model& model_;
    const PrimitiveBox& box_;
    std::mt19937_64 rng_;
};

bool wants(const SampleSpec& spec, std::string_view name) {
    if (spec.contracts.empty()) return true;
    for (const auto& c : spec.contracts) {
        if (c == name) return true;
    }
    return false;
}

constexpr double kConsistencyTol = 1e-13;
constexpr double kEntropyTol = 1e-12;

}  // namespace

ContractReport certify_contracts(const NumericalFlux& flux, const SampleSpec& spec) {
    const Model& model = flux.model();
    for (const auto& c : spec.contracts) {
        if (c != "F1" && c != "F2" && c != "F3" && c != "F4" && c != "F5")
            throw ConfigError("unknown contract '" + c + "' (expected F1..F5)");
    }
    if (spec.samples == 0) throw ConfigError("certify_contracts: sample count must be positive");
    if (static_cast<int>(spec.box.ranges.size()) != model.components())
        throw ConfigError("certify_contracts: box does not match the model");

    ContractReport report;
    report.flux = std::string(flux.name());
    report.model = std::string(model.name());
    report.box = format_box(model, spec.box);
    report.samples = spec.samples;
    report.seed = spec.seed;
    report.eta_low = hessian_bounds(model, spec.box).low;

    Interval step = spec.step_alpha.value_or(spec.box.alpha);
    if (!spec.step_alpha && step.width() == 0.0) step.hi = step.lo + 0.5;

    const bool f4 = wants(spec, "F4");
    Tracker t1("F1", kConsistencyTol, wants(spec, "F1"));
    Tracker t2("F2", kConsistencyTol, wants(spec, "F2"));
    Tracker t3("F3", 0.0, wants(spec, "F3"));
    Tracker t4("F4", kEntropyTol, f4);
    Tracker tgap("GAP", kEntropyTol, f4);
    Tracker tg("G-conservative", kConsistencyTol, f4);
    Tracker t5("F5", kConsistencyTol, wants(spec, "F5"));
    Tracker t4s("F4-stepped", kEntropyTol, false);
    Tracker tgaps("GAP-stepped", kEntropyTol, false);

    const auto conserved = model.conserved_components();
    const int dim = model.dimension();
    Sampler sampler(model, spec.box, spec.seed);

    // Entropy checks on one pair at both ν values; returns nothing, feeds the trackers.
    auto entropy_checks = [&](const State& uk, double ak, const State& ul, double al, const Normal& n, long index,
                              Tracker& t_entropy, Tracker& t_gap, Tracker* t_pos) {
        const FaceFlux ff = flux.evaluate(uk, ak, ul, al, n);
        const State fk = model.flux(uk, ak, n);
        const State jump = ff.k_view - fk;
        const double etak = model.entropy(uk, ak);
        const double fluxk = model.entropy_flux(uk, ak, n);
        const double gamma = fluxk + model.entropy_gradient(uk, ak).dot(jump);
        const double lg = flux.lipschitz(uk, ak, ul, al, n);
        for (double nu : {1.0 / lg, 0.5 / lg}) {
            const State w = uk - nu * jump;
            const std::string witness = describe(uk, ak, ul, al, n, dim, nu);
            const bool ok = model.admissible(w, ak);
            if (t_pos) {
                // Negated relative positivity margin: the worst row entry is minus the smallest margin.
                const double ratio = ok ? positivity_margin(model, w, ak) / positivity_margin(model, uk, ak) : 0.0;
                t_pos->record(-ratio, ok ? 0.0 : -1.0, index, witness);
            }
            if (!ok) continue;
            const double scale = std::max(1.0, std::abs(etak));
            const double entint = model.entropy(w, ak) - etak + nu * (ff.entropy - fluxk);
            t_entropy.record(entint, kEntropyTol * scale, index, witness);
            if (entint <= kEntropyTol * scale) {
                const double gap = gamma - ff.entropy - 0.5 * nu * report.eta_low * jump.squaredNorm();
                t_gap.record(-gap, kEntropyTol * scale, index, witness);
            }
        }
    };

    for (std::size_t s = 0; s < spec.samples; ++s) {
        const long index = static_cast<long>(s);
        const Normal n = sampler.normal();

        // Common-α pair.
        const double a = sampler.uniform(spec.box.alpha);
        const State uk = sampler.state(a);
        const State ul = sampler.state(a);
        {
            const State f = model.flux(uk, a, n);
            const State g = flux.evaluate(uk, a, uk, a, n).k_view;
            t1.record((g - f).cwiseAbs().maxCoeff(), kConsistencyTol * tolerance_scale(f), index,
                      describe(uk, a, uk, a, n, dim, 0.0));
        }
        {
            const FaceFlux kl = flux.evaluate(uk, a, ul, a, n);
            const FaceFlux lk = flux.evaluate(ul, a, uk, a, -n);
            double defect = 0.0;
            for (int k = 0; k < model.components(); ++k) {
                if (conserved[k]) defect = std::max(defect, std::abs(kl.k_view[k] + lk.k_view[k]));
            }
            t2.record(defect, kConsistencyTol * tolerance_scale(kl.k_view), index, describe(uk, a, ul, a, n, dim, 0.0));
            const double gdef = std::abs(kl.entropy + lk.entropy);
            tg.record(gdef, kConsistencyTol * std::max(1.0, std::abs(kl.entropy)), index,
                      describe(uk, a, ul, a, n, dim, 0.0));
        }
        entropy_checks(uk, a, ul, a, n, index, t4, tgap, &t3);

        // Stepped pairs: stationary (F5) and generic (informational entropy rows).
        const double ak = sampler.uniform(step);
        const double al = sampler.uniform(step);
        if (auto pair = sampler.stationary_pair(ak, al)) {
            const auto& [vk, vl] = *pair;
            try {
                const State g = flux.evaluate(vk, ak, vl, al, n).k_view;
                const State f = model.flux(vk, ak, n);
                t5.record((g - f).cwiseAbs().maxCoeff(), kConsistencyTol * tolerance_scale(f), index,
                          describe(vk, ak, vl, al, n, dim, 0.0));
            } catch (const DomainError&) {
            }
        }
        try {
            const State sk = sampler.state(ak);
            const State sl = sampler.state(al);
            entropy_checks(sk, ak, sl, al, n, index, t4s, tgaps, nullptr);
        } catch (const DomainError&) {
            // The box is not admissible at this α or the reconstruction dried out; skip.
        }
    }

    // F3 reports the smallest relative positivity margin.
    ContractRow f3 = t3.finish();
    f3.worst = -f3.worst;
    report.rows = {t1.finish(), t2.finish(), f3, t4.finish(), tgap.finish(), tg.finish(),
                   t5.finish(), t4s.finish(), tgaps.finish()};
    return report;
}

}  // namespace ncbal
