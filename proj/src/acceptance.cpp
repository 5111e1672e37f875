#include "ncbal/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <random>
#include <sstream>

#include "ncbal/errors.hpp"

namespace ncbal {

namespace {

const std::map<std::string, std::string>& scenario_texts() {
    static const std::map<std::string, std::string> texts = {
        {"wellbalance_1d", R"(
[model]
name = sw1d
gravity = 9.81
[mesh]
builder = uniform_1d
cells = 200
[initial]
preset = lake_at_rest
z0 = 1
alpha = step
alpha_left = 0
alpha_right = 0.5
[flux]
name = hydrostatic
[solver]
max_steps = 1000
box = h=0.4:1.1,U=-1:1,alpha=0:0.5
[stationary]
family = lake
z0 = 1
)"},
        {"wellbalance_2d", R"(
[model]
name = sw2d
gravity = 9.81
[mesh]
builder = structured_2d
nx = 32
ny = 32
[initial]
preset = lake_at_rest
z0 = 1
alpha = step
alpha_left = 0
alpha_right = 0.5
[flux]
name = hydrostatic
[solver]
max_steps = 1000
box = h=0.4:1.1,U=-1:1,V=-1:1,alpha=0:0.5
[stationary]
family = lake
z0 = 1
)"},
        {"dam_break", R"(
[model]
name = sw1d
gravity = 9.81
[mesh]
builder = uniform_1d
cells = 200
[initial]
preset = dam_break
h_left = 2
h_right = 1
[flux]
name = rusanov
[solver]
cfl = strengthened
zeta = 0.1
max_steps = 500
box = h=0.5:2.5,U=-2:2
)"},
        {"perturbed_lake_1d", R"(
[model]
name = sw1d
gravity = 1
[mesh]
builder = uniform_1d
cells = 32
[initial]
preset = perturbed_lake
z0 = 1
profile = cosine
amplitude = 0.1
alpha = step
alpha_left = 0
alpha_right = 0.2
[flux]
name = hydrostatic
[solver]
zeta = 0.1
max_steps = 50000
stop_on_convergence = true
rtol = 1e-12
box = h=0.6:1.3,U=-0.2:0.2,alpha=0:0.2
[stationary]
family = lake
z0 = auto
)"},
        {"perturbed_lake_2d", R"(
[model]
name = sw2d
gravity = 1
[mesh]
builder = structured_2d
nx = 16
ny = 16
[initial]
preset = perturbed_lake
z0 = 1
profile = cosine
amplitude = 0.1
alpha = step
alpha_left = 0
alpha_right = 0.2
[flux]
name = hydrostatic
[solver]
zeta = 0.1
max_steps = 50000
stop_on_convergence = true
rtol = 1e-12
box = h=0.6:1.3,U=-0.2:0.2,V=-0.2:0.2,alpha=0:0.2
[stationary]
family = lake
z0 = auto
)"},
        {"cone", R"(
[model]
name = sw1d
gravity = 9.81
[mesh]
builder = uniform_1d
x_min = 0
x_max = 100
cells = 1000
boundary = periodic
[initial]
preset = perturbed_lake
z0 = 1
profile = compact
amplitude = 0.1
center_x = 50
radius = 2
alpha = flat
[flux]
name = rusanov
[solver]
cfl = basic
max_steps = 500
box = h=0.5:1.5,U=-1:1
)"},
        {"lagrangian_column", R"(
[model]
name = lagrangian
gravity = 9.81
gamma = 1.4
cv = 1
[mesh]
builder = uniform_1d
cells = 200
[initial]
preset = hydrostatic_column
velocity = 0
reduced_pressure = 1
temperature = 1
alpha = ramp
alpha_left = 0
alpha_right = 9.81
[flux]
name = acoustic
[solver]
max_steps = 1000
box = tau=0.02:0.6,U=-1:1,e=0.5:2,alpha=0:9.81
[stationary]
family = hydrostatic
velocity = 0
reduced_pressure = 1
temperature = 1
)"},
        {"lagrangian_periodic", R"(
[model]
name = lagrangian
gravity = 9.81
gamma = 1.4
cv = 1
[mesh]
builder = uniform_1d
cells = 200
boundary = periodic
[initial]
preset = perturbed_column
profile = cosine
amplitude = 0.05
velocity = 0
reduced_pressure = 1
temperature = 1
alpha = ramp
alpha_left = 0
alpha_right = 9.81
[flux]
name = acoustic
[solver]
max_steps = 1000
box = tau=0.02:0.6,U=-1:1,e=0.5:2,alpha=0:9.81
)"},
    };
    return texts;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

std::string fixed(double x, int digits = 2) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

bool is_shallow(const std::string& text) {
    return text.find("name = sw1d") != std::string::npos || text.find("name = sw2d") != std::string::npos;
}

}  // namespace

std::string format_result(const CriterionResult& r) {
    return std::string(r.passed ? "PASS" : "FAIL") + " " + r.name + " " + r.detail + " (" + fixed(r.seconds) + " s)";
}

Verifier::Verifier(VerifyOptions options) : options_(std::move(options)) {}

const std::vector<std::string>& Verifier::suites() {
    static const std::vector<std::string> names = {"wellbalance", "lyapunov", "entropy", "conservation", "cone", "all"};
    return names;
}

const std::vector<std::string>& Verifier::scenario_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [name, text] : scenario_texts()) out.push_back(name);
        return out;
    }();
    return names;
}

std::string Verifier::scenario_config(const std::string& name) const {
    const auto it = scenario_texts().find(name);
    if (it == scenario_texts().end()) throw ConfigError("unknown scenario '" + name + "'");
    std::string text = it->second;
    if (options_.flux_override && is_shallow(text)) {
        for (const char* f : {"name = hydrostatic\n", "name = rusanov\n"}) {
            const auto pos = text.find(f);
            if (pos != std::string::npos) text.replace(pos, std::string(f).size(), "name = " + *options_.flux_override + "\n");
        }
    }
    text += "\n[solver]\nthreads = " + std::to_string(options_.threads) + "\n";
    return text;
}

const ScenarioRun& Verifier::scenario(const std::string& name) {
    if (auto it = cache_.find(name); it != cache_.end()) return *it->second;

    auto out = std::make_unique<ScenarioRun>(
        ScenarioRun{build_problem(parse_config(scenario_config(name))), {}, 0.0, 0.0, {}, -HUGE_VAL, 0, 0.0});
    ScenarioRun& sr = *out;
    const Model& model = *sr.problem.model;
    const Mesh& mesh = sr.problem.mesh;
    const std::vector<bool> conserved = model.conserved_components();
    const SolverState initial = sr.problem.initial;
    const std::vector<double> totals0 = component_totals(mesh, initial);
    std::vector<double> max_change(totals0.size(), 0.0);
    double state_scale = 0.0;

    // The cone is measured against the undisturbed lake, which need not share the initial mass.
    const bool cone = name == "cone";
    std::optional<StationaryField> cone_target;
    const std::vector<double> radii = {1.0, 2.0, 4.0, 8.0};
    const Point center(50.0, 0.0);
    if (cone) {
        cone_target = stationary_state(model, LakeAtRest{1.0}, initial.alpha);
        sr.lf = estimate_lf(model, LakeAtRest{1.0}, *sr.problem.settings.box, 20000, 11).lf;
    }

    const auto observer = [&](const SolverState& s, const DiagnosticsRecord& rec, const StepAudit*) {
        for (std::size_t k = 0; k < s.u.size(); ++k)
            sr.max_drift = std::max(sr.max_drift, (s.u[k] - initial.u[k]).cwiseAbs().maxCoeff());
        double l1 = 0.0;
        for (std::size_t k = 0; k < s.u.size(); ++k) l1 += mesh.cells()[k].measure * s.u[k].cwiseAbs().maxCoeff();
        state_scale = std::max(state_scale, l1);
        for (std::size_t i = 0; i < totals0.size(); ++i)
            max_change[i] = std::max(max_change[i], std::abs(rec.totals[i] - totals0[i]));
        if (cone) {
            for (double r : radii) {
                const ConeCheck c = stability_cone_check(model, mesh, initial, s, *cone_target, center, r, sr.lf);
                sr.worst_cone_margin = std::max(sr.worst_cone_margin, c.inner - c.outer - c.tolerance);
                ++sr.cone_checks;
            }
        }
    };

    const auto start = std::chrono::steady_clock::now();
    sr.result = run(mesh, *sr.problem.flux, initial, sr.problem.settings, observer);
    sr.seconds = seconds_since(start);
    for (std::size_t i = 0; i < totals0.size(); ++i) {
        if (!conserved[i]) continue;
        sr.conservation_drift.push_back(state_scale > 0.0 ? max_change[i] / state_scale : max_change[i]);
    }
    return *cache_.emplace(name, std::move(out)).first->second;
}

std::vector<CriterionResult> Verifier::run_suite(const std::string& suite) {
    using Fn = CriterionResult (Verifier::*)();
    struct Entry {
        const char* name;
        const char* suite;
        Fn fn;
    };
    static const std::vector<Entry> table = {
        {"well-balancing", "wellbalance", &Verifier::well_balancing},
        {"cell-entropy-inequality", "entropy", &Verifier::cell_entropy_inequality},
        {"relative-entropy-inequality", "lyapunov", &Verifier::relative_entropy_inequality},
        {"asymptotic-stability", "lyapunov", &Verifier::asymptotic_stability},
        {"exact-conservation", "conservation", &Verifier::exact_conservation},
        {"lemma-sandwich", "entropy", &Verifier::lemma_sandwich},
        {"flux-contracts", "entropy", &Verifier::flux_contracts},
        {"stability-cone", "cone", &Verifier::stability_cone},
        {"lagrangian-equilibrium", "wellbalance", &Verifier::lagrangian_equilibrium},
    };
    if (std::find(suites().begin(), suites().end(), suite) == suites().end())
        throw ConfigError("unknown suite '" + suite + "' (expected wellbalance, lyapunov, entropy, conservation, cone, all)");
    std::vector<CriterionResult> results;
    for (const Entry& e : table) {
        if (suite != "all" && suite != e.suite) continue;
        const auto start = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = (this->*e.fn)();
        } catch (const NumericalAbort& err) {
            r.name = e.name;
            r.passed = false;
            r.detail = std::string("numerical abort: ") + err.what();
        }
        r.seconds = seconds_since(start);
        results.push_back(std::move(r));
    }
    return results;
}

CriterionResult Verifier::well_balancing() {
    CriterionResult r{"well-balancing", true, "", 0.0};
    std::ostringstream d;
    for (const char* name : {"wellbalance_1d", "wellbalance_2d"}) {
        const ScenarioRun& s = scenario(name);
        const bool ok = s.max_drift <= 1e-12 && s.result.final_state.step == 1000 && s.seconds < 10.0;
        r.passed = r.passed && ok;
        d << name << ": max|u-u0|=" << sci(s.max_drift) << " steps=" << s.result.final_state.step
          << " t=" << fixed(s.seconds) << "s; ";
    }
    d << "limit 1e-12";
    r.detail = d.str();
    return r;
}

CriterionResult Verifier::cell_entropy_inequality() {
    CriterionResult r{"cell-entropy-inequality", true, "", 0.0};
    const ScenarioRun& s = scenario("dam_break");
    double worst = -HUGE_VAL, dissipation = 0.0;
    for (std::size_t i = 1; i < s.result.records.size(); ++i) {
        worst = std::max(worst, s.result.records[i].worst_residual);
        dissipation += s.result.records[i].total_dissipation;
    }
    r.passed = worst <= 1e-12 && s.result.final_state.step == 500 && s.seconds < 10.0 && dissipation > 0.0;
    r.detail = "dam break: max_K,n (r_K - D_K)=" + sci(worst) + " limit 1e-12, steps=" +
               std::to_string(s.result.final_state.step) + ", sum|D|=" + sci(dissipation);
    return r;
}

CriterionResult Verifier::relative_entropy_inequality() {
    CriterionResult r{"relative-entropy-inequality", true, "", 0.0};
    std::ostringstream d;
    for (const char* name : {"perturbed_lake_1d", "perturbed_lake_2d"}) {
        const ScenarioRun& s = scenario(name);
        const auto& recs = s.result.records;
        const std::size_t last = std::min<std::size_t>(recs.size() - 1, 2000);
        double worst = -HUGE_VAL;
        long increases = 0, not_strict = 0;
        for (std::size_t i = 1; i <= last; ++i) {
            worst = std::max(worst, recs[i].worst_relative_residual);
            if (recs[i].lyapunov > recs[i - 1].lyapunov) ++increases;
            if (recs[i].total_dissipation > 0.0 && !(recs[i].lyapunov < recs[i - 1].lyapunov)) ++not_strict;
        }
        const bool ok = last == 2000 && worst <= 1e-12 && increases == 0 && not_strict == 0 && s.seconds < 20.0;
        r.passed = r.passed && ok;
        d << name << ": worst residual-D=" << sci(worst) << " V increases=" << increases
          << " non-strict=" << not_strict << " steps=" << last << "; ";
    }
    d << "slack 1e-12";
    r.detail = d.str();
    return r;
}

CriterionResult Verifier::asymptotic_stability() {
    CriterionResult r{"asymptotic-stability", true, "", 0.0};
    std::ostringstream d;
    for (const char* name : {"perturbed_lake_1d", "perturbed_lake_2d"}) {
        const ScenarioRun& s = scenario(name);
        std::vector<double> v;
        for (const auto& rec : s.result.records) v.push_back(rec.lyapunov);
        const double z0 = *s.problem.lake_level;
        const ConvergenceReport rep = steady_convergence_report(*s.problem.model, v, s.result.final_state, z0);
        const double limit = s.problem.mesh.dimension() == 1 ? 120.0 : 300.0;
        const bool ok = rep.passed && rep.steps <= 50000 && s.seconds < limit;
        r.passed = r.passed && ok;
        d << name << ": steps=" << rep.steps << " V/V0=" << sci(rep.v0 > 0 ? rep.v_final / rep.v0 : 0.0)
          << " max|h+a-Z0|=" << sci(rep.max_surface_deviation) << " max|U|=" << sci(rep.max_velocity)
          << " rate=" << fixed(rep.rate, 6) << " t=" << fixed(s.seconds) << "s; ";
    }
    d << "limits V/V0<=1e-10, 1e-6*Z0, 1e-6";
    r.detail = d.str();
    return r;
}

CriterionResult Verifier::exact_conservation() {
    CriterionResult r{"exact-conservation", true, "", 0.0};
    std::ostringstream d;
    double worst = 0.0;
    std::string worst_name;
    for (const std::string& name : scenario_names()) {
        const ScenarioRun& s = scenario(name);
        for (double drift : s.conservation_drift) {
            if (drift >= worst) {
                worst = drift;
                worst_name = name;
            }
        }
    }
    const ScenarioRun& lag = scenario("lagrangian_periodic");
    const bool lag_all = lag.conservation_drift.size() == 3;
    r.passed = worst <= 1e-12 && lag_all;
    d << scenario_names().size() << " runs, worst relative drift " << sci(worst) << " (" << worst_name
      << "), lagrangian periodic drifts";
    for (double x : lag.conservation_drift) d << ' ' << sci(x);
    d << "; limit 1e-12";
    r.detail = d.str();
    return r;
}

CriterionResult Verifier::lemma_sandwich() {
    CriterionResult r{"lemma-sandwich", true, "", 0.0};
    std::ostringstream d;
    std::mt19937_64 rng(2023);
    auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    for (const char* name : {"sw1d", "sw2d"}) {
        const ModelPtr m = make_model(name);
        const bool two = m->dimension() == 2;
        const PrimitiveBox box = parse_box(*m, two ? "h=0.5:2,U=-1:1,V=-1:1,alpha=0:0.5" : "h=0.5:2,U=-1:1,alpha=0:0.5");
        const HessianBounds b = hessian_bounds(*m, box);
        long violations = 0, drawn = 0;
        auto sample = [&](double a) {
            for (;;) {
                State prim(m->components());
                prim[0] = uni(0.5, 2.0);
                for (int i = 1; i < prim.size(); ++i) prim[i] = uni(-1.0, 1.0);
                if (prim.tail(prim.size() - 1).norm() <= 1.0) return m->from_primitive(prim, a);
            }
        };
        while (drawn < 10000) {
            const double a = uni(0.0, 0.5);
            const State u = sample(a), v = sample(a);
            const double d2 = (u - v).squaredNorm();
            const double h = m->relative_entropy(u, v, a);
            if (!(0.5 * b.low * d2 <= h && h <= 0.5 * b.high * d2)) ++violations;
            ++drawn;
        }
        r.passed = r.passed && violations == 0;
        if (d.tellp() > 0) d << "; ";
        d << name << ": " << violations << "/" << drawn << " violations (eta_low=" << sci(b.low)
          << ", eta_high=" << sci(b.high) << ")";
    }
    r.detail = d.str();
    return r;
}

CriterionResult Verifier::flux_contracts() {
    CriterionResult r{"flux-contracts", true, "", 0.0};
    std::ostringstream d;
    const ModelPtr m = make_model("sw1d");
    SampleSpec spec;
    spec.box = parse_box(*m, "h=0.5:2,U=-1:1,alpha=0:0.5");
    spec.samples = 10000;
    spec.seed = 42;
    const std::string second = options_.flux_override.value_or("hydrostatic");
    for (const std::string& fname : {std::string("rusanov"), second}) {
        const ContractReport rep = certify_contracts(*make_flux(fname, m), spec);
        d << fname << ":";
        for (const char* c : {"F1", "F2", "F3", "F4", "GAP"}) {
            const ContractRow* row = rep.find(c);
            const bool ok = row && row->status == "pass";
            r.passed = r.passed && ok;
            d << ' ' << c << '=' << (row ? row->status : "missing");
        }
        if (fname == "rusanov") {
            const ContractRow* f5 = rep.find("F5");
            const bool fails = f5 && f5->status == "fail" && f5->witness >= 0 && f5->worst > 0.0;
            r.passed = r.passed && fails;
            d << " F5=" << (f5 ? f5->status : "missing") << " (worst " << sci(f5 ? f5->worst : 0.0) << ", witness #"
              << (f5 ? f5->witness : -1) << ")";
        } else {
            const ContractRow* f5 = rep.find("F5");
            d << " F5=" << (f5 ? f5->status : "missing");
        }
        d << "; ";
    }
    d << "10000 samples, nu in {1/L_g, 1/(2L_g)}";
    r.detail = d.str();
    return r;
}

CriterionResult Verifier::stability_cone() {
    CriterionResult r{"stability-cone", true, "", 0.0};
    const ScenarioRun& s = scenario("cone");
    r.passed = s.worst_cone_margin <= 0.0 && s.result.final_state.step == 500 && s.seconds < 30.0;
    r.detail = "periodic bump, L_f=" + fixed(s.lf, 4) + ", " + std::to_string(s.cone_checks) +
               " checks over R in {1,2,4,8}, worst inner-outer-tol=" + sci(s.worst_cone_margin) +
               ", t_final=" + fixed(s.result.final_state.time, 3);
    return r;
}

CriterionResult Verifier::lagrangian_equilibrium() {
    CriterionResult r{"lagrangian-equilibrium", true, "", 0.0};
    const ScenarioRun& s = scenario("lagrangian_column");
    r.passed = s.max_drift <= 1e-12 && s.result.final_state.step == 1000;
    r.detail = "hydrostatic column, acoustic flux: max|u-u0|=" + sci(s.max_drift) + " over " +
               std::to_string(s.result.final_state.step) + " steps, limit 1e-12";
    return r;
}

}  // namespace ncbal
