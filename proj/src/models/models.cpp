#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "model_factories.hpp"
#include "ncbal/errors.hpp"

namespace ncbal {

bool Model::admissible(const State& u, double alpha) const noexcept {
    try {
        check_admissible(u, alpha);
        return true;
    } catch (const DomainError&) {
        return false;
    }
}

Interval Model::alpha_domain() const { return {-HUGE_VAL, HUGE_VAL}; }

ModelPtr make_model(ModelKind kind, const ModelParams& params) {
    switch (kind) {
        case ModelKind::ShallowWater1D: return detail::make_shallow_water(1, params);
        case ModelKind::ShallowWater2D: return detail::make_shallow_water(2, params);
        case ModelKind::PorousEuler1D: return detail::make_porous_euler(params);
        case ModelKind::Lagrangian1D: return detail::make_lagrangian(params);
    }
    throw ConfigError("unknown model kind");
}

ModelPtr make_model(std::string_view name, const ModelParams& params) {
    for (auto kind : {ModelKind::ShallowWater1D, ModelKind::ShallowWater2D, ModelKind::PorousEuler1D,
                      ModelKind::Lagrangian1D}) {
        if (model_name(kind) == name) return make_model(kind, params);
    }
    throw ConfigError("unknown model '" + std::string(name) + "' (expected sw1d, sw2d, porous_euler, lagrangian)");
}

std::string_view model_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::ShallowWater1D: return "sw1d";
        case ModelKind::ShallowWater2D: return "sw2d";
        case ModelKind::PorousEuler1D: return "porous_euler";
        case ModelKind::Lagrangian1D: return "lagrangian";
    }
    return "?";
}

double relative_entropy_definition(const Model& model, const State& u, const State& v, double alpha) {
    return model.entropy(u, alpha) - model.entropy(v, alpha) - model.entropy_gradient(v, alpha).dot(u - v);
}

bool PrimitiveBox::contains(const Model& model, const State& u, double alpha_value) const {
    if (!model.admissible(u, alpha_value) || !alpha.contains(alpha_value)) return false;
    const State prim = model.to_primitive(u, alpha_value);
    for (int i = 0; i < prim.size(); ++i) {
        if (!ranges[i].contains(prim[i])) return false;
    }
    return true;
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_number(std::string_view text, std::string_view context) {
    const std::string s(trim(text));
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != s.size()) {
        throw ConfigError("box: cannot parse number '" + s + "' in '" + std::string(context) + "'");
    }
    return value;
}

}  // namespace

PrimitiveBox parse_box(const Model& model, std::string_view spec) {
    const auto names = model.primitive_names();
    PrimitiveBox box;
    box.ranges.assign(names.size(), Interval{});
    std::vector<bool> seen(names.size(), false);
    bool alpha_seen = false;

    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const std::size_t comma = std::min(spec.find(',', pos), spec.size());
        const std::string_view item = trim(spec.substr(pos, comma - pos));
        pos = comma + 1;
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string_view::npos) throw ConfigError("box: expected name=lo:hi, got '" + std::string(item) + "'");
        const std::string_view key = trim(item.substr(0, eq));
        const std::string_view value = trim(item.substr(eq + 1));
        Interval range;
        const auto colon = value.find(':');
        if (colon == std::string_view::npos) {
            range.lo = range.hi = parse_number(value, item);
        } else {
            range.lo = parse_number(value.substr(0, colon), item);
            range.hi = parse_number(value.substr(colon + 1), item);
        }
        if (range.lo > range.hi) throw ConfigError("box: empty interval in '" + std::string(item) + "'");
        if (key == "alpha") {
            box.alpha = range;
            alpha_seen = true;
            continue;
        }
        bool matched = false;
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == key) {
                box.ranges[i] = range;
                seen[i] = matched = true;
            }
        }
        if (!matched) throw ConfigError("box: unknown variable '" + std::string(key) + "' for model " + std::string(model.name()));
    }
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (!seen[i]) throw ConfigError("box: missing range for '" + names[i] + "'");
    }
    if (!alpha_seen) {
        const Interval dom = model.alpha_domain();
        const double a = std::clamp(0.0, dom.lo, dom.hi) > 0.0 ? 1.0 : 0.0;
        box.alpha = {a, a};
    }
    return box;
}

std::string format_box(const Model& model, const PrimitiveBox& box) {
    // Shortest text that parses back to the same doubles.
    auto num = [](double x) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, x);
        return std::string(buf, res.ptr);
    };
    std::string out;
    const auto names = model.primitive_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        out += names[i] + '=' + num(box.ranges[i].lo) + ':' + num(box.ranges[i].hi) + ',';
    out += "alpha=" + num(box.alpha.lo) + ':' + num(box.alpha.hi);
    return out;
}

HessianBounds hessian_bounds(const Model& model, const PrimitiveBox& box, int points_per_axis) {
    if (points_per_axis < 10) throw DomainError("hessian_bounds: need at least 10 points per axis");
    const int n = model.components();
    if (static_cast<int>(box.ranges.size()) != n) throw DomainError("hessian_bounds: box dimension mismatch");

    // Axes: the primitive variables then α; degenerate axes get a single node.
    std::vector<Interval> axes = box.ranges;
    axes.push_back(box.alpha);
    std::vector<int> counts;
    for (const auto& axis : axes) {
        if (axis.lo > axis.hi) throw DomainError("hessian_bounds: empty box");
        counts.push_back(axis.width() > 0.0 ? points_per_axis : 1);
    }

    double low = HUGE_VAL;
    double high = -HUGE_VAL;
    std::vector<int> idx(axes.size(), 0);
    State prim(n);
    Eigen::SelfAdjointEigenSolver<Matrix> solver;
    while (true) {
        for (std::size_t a = 0; a < axes.size(); ++a) {
            const double t = counts[a] == 1 ? 0.0 : static_cast<double>(idx[a]) / (counts[a] - 1);
            const double x = axes[a].lo + t * axes[a].width();
            if (static_cast<int>(a) < n) prim[static_cast<int>(a)] = x;
        }
        const double alpha = counts.back() == 1 ? axes.back().lo
                                                : axes.back().lo + axes.back().width() * idx.back() / (counts.back() - 1);
        State u;
        try {
            u = model.from_primitive(prim, alpha);
        } catch (const DomainError& err) {
            throw DomainError(std::string("hessian_bounds: box touches the boundary of the admissible set (") +
                              err.what() + ")");
        }
        solver.compute(model.entropy_hessian(u, alpha), Eigen::EigenvaluesOnly);
        low = std::min(low, solver.eigenvalues().minCoeff());
        high = std::max(high, solver.eigenvalues().maxCoeff());

        std::size_t a = 0;
        while (a < idx.size() && ++idx[a] == counts[a]) idx[a++] = 0;
        if (a == idx.size()) break;
    }
    if (!(low > 0.0)) throw DomainError("hessian_bounds: entropy is not strictly convex on the box");
    return {kHessianLowSafety * low, kHessianHighSafety * high};
}

namespace {

[[noreturn]] void incompatible(const Model& model, std::string_view family) {
    throw DomainError("stationary family '" + std::string(family) + "' does not apply to model " +
                      std::string(model.name()));
}

State family_h0(const Model& model, const FamilyData& family) {
    const int n = model.components();
    State h0 = State::Zero(n);
    if (const auto* lake = std::get_if<LakeAtRest>(&family)) {
        if (model.kind() != ModelKind::ShallowWater1D && model.kind() != ModelKind::ShallowWater2D)
            incompatible(model, "lake");
        h0[0] = model.params().gravity * lake->z0;
    } else if (const auto* gas = std::get_if<RestingGas>(&family)) {
        if (model.kind() != ModelKind::PorousEuler1D) incompatible(model, "rest_gas");
        const double e = model.params().cv * gas->temperature;
        const double rho = gas->pressure / ((model.params().gamma - 1.0) * e);
        State prim(3);
        prim << rho, 0.0, e;
        // The entropy variable of the porous system does not depend on α.
        h0 = model.entropy_gradient(model.from_primitive(prim, 1.0), 1.0);
        h0[1] = 0.0;
    } else if (const auto* col = std::get_if<HydrostaticColumn>(&family)) {
        if (model.kind() != ModelKind::Lagrangian1D) incompatible(model, "hydrostatic");
        const double inv_temp = 1.0 / col->temperature;
        h0 << -col->reduced_pressure * inv_temp, col->velocity * inv_temp, -inv_temp;
    }
    return h0;
}

}  // namespace

State stationary_point(const Model& model, const FamilyData& family, double alpha) {
    const int n = model.components();
    State v(n);
    if (const auto* lake = std::get_if<LakeAtRest>(&family)) {
        if (model.kind() != ModelKind::ShallowWater1D && model.kind() != ModelKind::ShallowWater2D)
            incompatible(model, "lake");
        v.setZero();
        v[0] = lake->z0 - alpha;
        if (!(v[0] >= kMinDepth)) {
            std::ostringstream msg;
            msg << "lake at rest: surface level Z0 = " << lake->z0 << " does not exceed bathymetry alpha = " << alpha;
            throw DomainError(msg.str());
        }
    } else if (const auto* gas = std::get_if<RestingGas>(&family)) {
        if (model.kind() != ModelKind::PorousEuler1D) incompatible(model, "rest_gas");
        if (!(gas->temperature > 0.0) || !(gas->pressure > 0.0))
            throw DomainError("resting gas: temperature and pressure must be positive");
        const double e = model.params().cv * gas->temperature;
        State prim(3);
        prim << gas->pressure / ((model.params().gamma - 1.0) * e), 0.0, e;
        v = model.from_primitive(prim, alpha);
    } else if (const auto* col = std::get_if<HydrostaticColumn>(&family)) {
        if (model.kind() != ModelKind::Lagrangian1D) incompatible(model, "hydrostatic");
        const double e = model.params().cv * col->temperature;
        const double p = col->reduced_pressure + alpha;
        if (!(col->temperature > 0.0) || !(p > 0.0)) {
            std::ostringstream msg;
            msg << "hydrostatic column: pressure p = " << p << " at alpha = " << alpha << " must be positive";
            throw DomainError(msg.str());
        }
        State prim(3);
        prim << (model.params().gamma - 1.0) * e / p, col->velocity, e;
        v = model.from_primitive(prim, alpha);
    }
    return v;
}

StationaryField stationary_state(const Model& model, const FamilyData& family, std::span<const double> alpha) {
    StationaryField field;
    field.h0 = family_h0(model, family);
    field.states.reserve(alpha.size());
    std::vector<std::size_t> failed;
    std::string first_error;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        try {
            field.states.push_back(stationary_point(model, family, alpha[k]));
        } catch (const DomainError& err) {
            if (failed.empty()) first_error = err.what();
            failed.push_back(k);
            field.states.push_back(State::Zero(model.components()));
        }
    }
    if (!failed.empty()) {
        std::ostringstream msg;
        msg << first_error << "; inadmissible cells:";
        for (std::size_t i = 0; i < failed.size() && i < 20; ++i) msg << ' ' << failed[i];
        if (failed.size() > 20) msg << " ... (" << failed.size() << " total)";
        throw DomainError(msg.str());
    }
    return field;
}

double lake_level_from_volume(std::span<const double> alpha, std::span<const double> cell_measures, double volume) {
    if (alpha.size() != cell_measures.size() || alpha.empty())
        throw DomainError("lake level: alpha and cell measures must be non-empty and of equal length");
    double area = 0.0;
    double bottom = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        area += cell_measures[k];
        bottom += cell_measures[k] * alpha[k];
    }
    const double z0 = (volume + bottom) / area;
    std::vector<std::size_t> dry;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        if (!(z0 - alpha[k] >= kMinDepth)) dry.push_back(k);
    }
    if (!dry.empty()) {
        std::ostringstream msg;
        msg << "insufficient water volume: level Z0 = " << z0 << " leaves " << dry.size()
            << " cell(s) dry (wetness condition V0 > max alpha - integral of alpha violated); cells:";
        for (std::size_t i = 0; i < dry.size() && i < 20; ++i) msg << ' ' << dry[i];
        throw DomainError(msg.str());
    }
    return z0;
}

double stationarity_defect(const Model& model, const StationaryField& field, std::span<const double> alpha) {
    double worst = 0.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
        const State grad = model.entropy_gradient(field.states[k], alpha[k]);
        worst = std::max(worst, (grad - field.h0).cwiseAbs().maxCoeff());
    }
    return worst;
}

}  // namespace ncbal
