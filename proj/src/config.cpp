#include "ncbal/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "ncbal/errors.hpp"

namespace ncbal {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v, int line) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x)) throw ParseError("not a number: '" + v + "'", line);
    return x;
}

long to_long(const std::string& v, int line) {
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (v.empty() || end != v.c_str() + v.size()) throw ParseError("not an integer: '" + v + "'", line);
    return x;
}

bool to_bool(const std::string& v, int line) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ParseError("expected true or false, got '" + v + "'", line);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v) {
    const std::filesystem::path p(v);
    return p.is_absolute() ? p : base / p;
}

using Setter = void (*)(RunConfig&, const std::string&, int, const std::filesystem::path&);

#define NCBAL_KEY(section, key, body) \
    {section "." key, [](RunConfig& c, const std::string& v, int line, const std::filesystem::path& base) { \
         (void)line;                                                                                        \
         (void)base;                                                                                        \
         body;                                                                                              \
     }}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        NCBAL_KEY("model", "name", c.model = v),
        NCBAL_KEY("model", "gravity", c.params.gravity = to_double(v, line)),
        NCBAL_KEY("model", "gamma", c.params.gamma = to_double(v, line)),
        NCBAL_KEY("model", "cv", c.params.cv = to_double(v, line)),

        NCBAL_KEY("mesh", "builder", c.mesh.builder = v),
        NCBAL_KEY("mesh", "x_min", c.mesh.x_min = to_double(v, line)),
        NCBAL_KEY("mesh", "x_max", c.mesh.x_max = to_double(v, line)),
        NCBAL_KEY("mesh", "y_min", c.mesh.y_min = to_double(v, line)),
        NCBAL_KEY("mesh", "y_max", c.mesh.y_max = to_double(v, line)),
        NCBAL_KEY("mesh", "cells", c.mesh.cells = static_cast<int>(to_long(v, line))),
        NCBAL_KEY("mesh", "nx", c.mesh.nx = static_cast<int>(to_long(v, line))),
        NCBAL_KEY("mesh", "ny", c.mesh.ny = static_cast<int>(to_long(v, line))),
        NCBAL_KEY("mesh", "boundary",
                  if (v == "wall") c.mesh.boundary = BoundaryKind::Wall;
                  else if (v == "periodic") c.mesh.boundary = BoundaryKind::Periodic;
                  else throw ParseError("boundary must be wall or periodic", line)),
        NCBAL_KEY("mesh", "element",
                  if (v == "quad") c.mesh.element = ElementKind::Quad;
                  else if (v == "triangle") c.mesh.element = ElementKind::Triangle;
                  else throw ParseError("element must be quad or triangle", line)),
        NCBAL_KEY("mesh", "file", c.mesh.file = resolve(base, v)),

        NCBAL_KEY("initial", "preset", c.initial.preset = v),
        NCBAL_KEY("initial", "z0", c.initial.z0 = to_double(v, line)),
        NCBAL_KEY("initial", "profile", c.initial.profile = v),
        NCBAL_KEY("initial", "amplitude", c.initial.amplitude = to_double(v, line)),
        NCBAL_KEY("initial", "center_x", c.initial.center_x = to_double(v, line)),
        NCBAL_KEY("initial", "center_y", c.initial.center_y = to_double(v, line)),
        NCBAL_KEY("initial", "radius", c.initial.radius = to_double(v, line)),
        NCBAL_KEY("initial", "h_left", c.initial.h_left = to_double(v, line)),
        NCBAL_KEY("initial", "h_right", c.initial.h_right = to_double(v, line)),
        NCBAL_KEY("initial", "position", c.initial.position = to_double(v, line)),
        NCBAL_KEY("initial", "velocity", c.initial.velocity = to_double(v, line)),
        NCBAL_KEY("initial", "reduced_pressure", c.initial.reduced_pressure = to_double(v, line)),
        NCBAL_KEY("initial", "temperature", c.initial.temperature = to_double(v, line)),
        NCBAL_KEY("initial", "pressure", c.initial.pressure = to_double(v, line)),
        NCBAL_KEY("initial", "alpha", c.initial.alpha.kind = v),
        NCBAL_KEY("initial", "alpha_value", c.initial.alpha.value = to_double(v, line)),
        NCBAL_KEY("initial", "alpha_left", c.initial.alpha.left = to_double(v, line)),
        NCBAL_KEY("initial", "alpha_right", c.initial.alpha.right = to_double(v, line)),
        NCBAL_KEY("initial", "alpha_position", c.initial.alpha.position = to_double(v, line)),
        NCBAL_KEY("initial", "alpha_file", c.initial.alpha.file = resolve(base, v)),

        NCBAL_KEY("flux", "name", c.flux = v),

        NCBAL_KEY("solver", "cfl",
                  if (v == "basic") c.solver.cfl = CflMode::Basic;
                  else if (v == "strengthened") c.solver.cfl = CflMode::Strengthened;
                  else throw ParseError("cfl must be basic or strengthened", line)),
        NCBAL_KEY("solver", "zeta", c.solver.zeta = to_double(v, line)),
        NCBAL_KEY("solver", "max_steps", c.solver.max_steps = to_long(v, line)),
        NCBAL_KEY("solver", "final_time", c.solver.final_time = to_double(v, line)),
        NCBAL_KEY("solver", "rtol", c.solver.rtol = to_double(v, line)),
        NCBAL_KEY("solver", "stop_on_convergence", c.solver.stop_on_convergence = to_bool(v, line)),
        NCBAL_KEY("solver", "threads", c.solver.threads = static_cast<int>(to_long(v, line))),
        NCBAL_KEY("solver", "box", c.solver.box = v),
        NCBAL_KEY("solver", "check_convex", c.solver.check_convex = to_bool(v, line)),

        NCBAL_KEY("stationary", "family", c.stationary.family = v),
        NCBAL_KEY("stationary", "z0",
                  if (v == "auto") c.stationary.z0.reset();
                  else c.stationary.z0 = to_double(v, line)),
        NCBAL_KEY("stationary", "temperature", c.stationary.temperature = to_double(v, line)),
        NCBAL_KEY("stationary", "pressure", c.stationary.pressure = to_double(v, line)),
        NCBAL_KEY("stationary", "velocity", c.stationary.velocity = to_double(v, line)),
        NCBAL_KEY("stationary", "reduced_pressure", c.stationary.reduced_pressure = to_double(v, line)),

        NCBAL_KEY("output", "directory", c.output.directory = resolve(base, v)),
        NCBAL_KEY("output", "diagnostics", c.output.diagnostics = v),
        NCBAL_KEY("output", "snapshot_every", c.output.snapshot_every = to_long(v, line)),
        NCBAL_KEY("output", "snapshot_prefix", c.output.snapshot_prefix = v),
    };
    return table;
}

#undef NCBAL_KEY

void validate(const RunConfig& c) {
    if (!(c.solver.zeta > 0.0 && c.solver.zeta < 1.0)) throw ConfigError("solver.zeta must lie in (0, 1)");
    if (c.solver.max_steps < 0) throw ConfigError("solver.max_steps must be nonnegative");
    if (c.solver.threads < 1) throw ConfigError("solver.threads must be at least 1");
    if (!(c.solver.rtol > 0.0)) throw ConfigError("solver.rtol must be positive");
    if (c.solver.final_time && !(*c.solver.final_time >= 0.0)) throw ConfigError("solver.final_time must be nonnegative");
    if (!(c.params.gravity > 0.0)) throw ConfigError("model.gravity must be positive");
    if (!(c.params.gamma > 1.0)) throw ConfigError("model.gamma must exceed 1");
    if (!(c.params.cv > 0.0)) throw ConfigError("model.cv must be positive");
    if (c.output.snapshot_every < 0) throw ConfigError("output.snapshot_every must be nonnegative");
    if (c.mesh.builder == "file" && !std::filesystem::exists(c.mesh.file))
        throw ConfigError("mesh file not found: " + c.mesh.file.string());
    if (c.initial.alpha.kind == "file" && !std::filesystem::exists(c.initial.alpha.file))
        throw ConfigError("alpha file not found: " + c.initial.alpha.file.string());
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    static const std::vector<std::string> sections = {"model",  "mesh",       "initial", "flux",
                                                      "solver", "stationary", "output"};
    RunConfig config;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ParseError("unterminated section header", line);
            section = trim(s.substr(1, s.size() - 2));
            if (std::find(sections.begin(), sections.end(), section) == sections.end())
                throw ParseError("unknown section [" + section + "]", line);
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", line);
        if (section.empty()) throw ParseError("key outside any section", line);
        const std::string key = trim(s.substr(0, eq));
        const std::string value = trim(s.substr(eq + 1));
        const auto it = setters().find(section + "." + key);
        if (it == setters().end()) throw ParseError("unknown key '" + key + "' in [" + section + "]", line);
        it->second(config, value, line, base_dir);
    }
    validate(config);
    return config;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

namespace {

// Area of the part of a cell with x < position.
double area_left_of(const Mesh& mesh, const Cell& cell, double position) {
    const auto& nodes = mesh.nodes();
    if (mesh.dimension() == 1) {
        const double a = std::min(nodes[cell.nodes[0]].x(), nodes[cell.nodes[1]].x());
        const double b = std::max(nodes[cell.nodes[0]].x(), nodes[cell.nodes[1]].x());
        return std::clamp(position - a, 0.0, b - a);
    }
    // Clip the polygon against the half-plane x < position, then take the shoelace area.
    std::vector<Point> clipped;
    const std::size_t m = cell.nodes.size();
    for (std::size_t i = 0; i < m; ++i) {
        const Point& p = nodes[cell.nodes[i]];
        const Point& q = nodes[cell.nodes[(i + 1) % m]];
        const bool pin = p.x() < position, qin = q.x() < position;
        if (pin) clipped.push_back(p);
        if (pin != qin) {
            const double t = (position - p.x()) / (q.x() - p.x());
            clipped.emplace_back(position, p.y() + t * (q.y() - p.y()));
        }
    }
    double area = 0.0;
    for (std::size_t i = 0; i < clipped.size(); ++i) {
        const Point& p = clipped[i];
        const Point& q = clipped[(i + 1) % clipped.size()];
        area += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * area;
}

// Exact cell averages of x < position ? left : right.
std::vector<double> step_averages(const Mesh& mesh, double position, double left, double right) {
    std::vector<double> out;
    out.reserve(mesh.cell_count());
    for (const Cell& cell : mesh.cells()) {
        const double f = area_left_of(mesh, cell, position) / cell.measure;
        if (f >= 1.0 - 1e-14) out.push_back(left);
        else if (f <= 1e-14) out.push_back(right);
        else out.push_back(f * left + (1.0 - f) * right);
    }
    return out;
}

}  // namespace

Mesh build_mesh(const MeshSpec& spec) {
    if (spec.builder == "uniform_1d") return build_uniform_1d(spec.x_min, spec.x_max, spec.cells, spec.boundary);
    if (spec.builder == "structured_2d") {
        if (spec.boundary == BoundaryKind::Periodic)
            throw ConfigError("structured_2d meshes support wall boundaries only");
        return build_structured_2d(spec.nx, spec.ny, Box2d{spec.x_min, spec.x_max, spec.y_min, spec.y_max},
                                   spec.element);
    }
    if (spec.builder == "file") return load_mesh(spec.file);
    throw ConfigError("unknown mesh builder '" + spec.builder + "'");
}

std::vector<double> build_alpha(const AlphaSpec& spec, const Mesh& mesh) {
    if (spec.kind == "flat") return std::vector<double>(mesh.cell_count(), spec.value);
    if (spec.kind == "step") return step_averages(mesh, spec.position, spec.left, spec.right);
    if (spec.kind == "ramp") {
        const double x0 = mesh.lower_corner().x(), x1 = mesh.upper_corner().x();
        const double l = spec.left, r = spec.right;
        return project_cell_averages([=](const Point& p) { return l + (r - l) * (p.x() - x0) / (x1 - x0); }, mesh, 2);
    }
    if (spec.kind == "file") {
        std::ifstream in(spec.file);
        if (!in) throw ConfigError("cannot open alpha file: " + spec.file.string());
        std::vector<double> alpha;
        std::string raw;
        int line = 0;
        while (std::getline(in, raw)) {
            ++line;
            const auto hash = raw.find('#');
            const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (s.empty()) continue;
            alpha.push_back(to_double(s, line));
        }
        if (alpha.size() != mesh.cell_count())
            throw ConfigError("alpha file has " + std::to_string(alpha.size()) + " values for " +
                              std::to_string(mesh.cell_count()) + " cells");
        return alpha;
    }
    throw ConfigError("unknown alpha kind '" + spec.kind + "'");
}

namespace {

// Smooth perturbation profile in [−1, 1] (cosine) or [0, 1] (compact bump).
std::function<double(const Point&)> profile(const InitialSpec& init, const Mesh& mesh) {
    const Point lo = mesh.lower_corner(), hi = mesh.upper_corner();
    const int dim = mesh.dimension();
    if (init.profile == "cosine") {
        return [=](const Point& p) {
            double v = std::cos(M_PI * (p.x() - lo.x()) / (hi.x() - lo.x()));
            if (dim == 2) v *= std::cos(M_PI * (p.y() - lo.y()) / (hi.y() - lo.y()));
            return v;
        };
    }
    if (init.profile == "compact") {
        if (!(init.radius > 0.0)) throw ConfigError("initial.radius must be positive");
        const Point c(init.center_x, dim == 2 ? init.center_y : 0.0);
        const double r = init.radius;
        return [=](const Point& p) {
            Point q = p;
            if (dim == 1) q.y() = 0.0;
            const double s = (q - c).norm() / r;
            return s < 1.0 ? (1.0 - s * s) * (1.0 - s * s) : 0.0;
        };
    }
    throw ConfigError("unknown profile '" + init.profile + "'");
}

bool shallow(const Model& m) {
    return m.kind() == ModelKind::ShallowWater1D || m.kind() == ModelKind::ShallowWater2D;
}

State sw_state(const Model& m, double h, double u) {
    State s = State::Zero(m.components());
    s[0] = h;
    s[1] = h * u;
    return s;
}

SolverState initial_state(const Model& m, const Mesh& mesh, const InitialSpec& init, std::vector<double> alpha) {
    SolverState s;
    s.alpha = std::move(alpha);
    const std::string& preset = init.preset;
    auto need = [&](bool ok, const char* what) {
        if (!ok) throw ConfigError("preset '" + preset + "' requires " + what);
    };
    try {
        if (preset == "lake_at_rest") {
            need(shallow(m), "a shallow-water model");
            for (double a : s.alpha) s.u.push_back(stationary_point(m, LakeAtRest{init.z0}, a));
        } else if (preset == "perturbed_lake") {
            need(shallow(m), "a shallow-water model");
            const auto shape = profile(init, mesh);
            const double z0 = init.z0, amp = init.amplitude;
            const auto surface =
                project_cell_averages([&](const Point& p) { return z0 * (1.0 + amp * shape(p)); }, mesh, 2);
            for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
                const double h = surface[k] - s.alpha[k];
                if (!(h >= kMinDepth))
                    throw ConfigError("perturbed_lake: cell " + std::to_string(k) + " is dry (surface below alpha)");
                s.u.push_back(sw_state(m, h, init.velocity));
            }
        } else if (preset == "dam_break") {
            need(shallow(m), "a shallow-water model");
            const auto h = step_averages(mesh, init.position, init.h_left, init.h_right);
            for (double hk : h) s.u.push_back(sw_state(m, hk, init.velocity));
        } else if (preset == "hydrostatic_column" || preset == "perturbed_column") {
            need(m.kind() == ModelKind::Lagrangian1D, "the lagrangian model");
            std::vector<double> factor(mesh.cell_count(), 1.0);
            if (preset == "perturbed_column") {
                const auto shape = profile(init, mesh);
                factor = project_cell_averages([&](const Point& p) { return 1.0 + init.amplitude * shape(p); }, mesh, 2);
            }
            for (std::size_t k = 0; k < mesh.cell_count(); ++k) {
                const HydrostaticColumn col{init.velocity, init.reduced_pressure * factor[k], init.temperature};
                s.u.push_back(stationary_point(m, col, s.alpha[k]));
            }
        } else if (preset == "resting_gas") {
            need(m.kind() == ModelKind::PorousEuler1D, "the porous_euler model");
            for (double a : s.alpha) s.u.push_back(stationary_point(m, RestingGas{init.temperature, init.pressure}, a));
        } else {
            throw ConfigError("unknown initial preset '" + preset + "'");
        }
    } catch (const DomainError& err) {
        throw ConfigError(std::string("initial condition: ") + err.what());
    }
    return s;
}

}  // namespace

Problem build_problem(const RunConfig& config) {
    ModelPtr model = make_model(config.model, config.params);
    Mesh mesh = build_mesh(config.mesh);
    if (mesh.dimension() != model->dimension())
        throw ConfigError("model '" + config.model + "' is " + std::to_string(model->dimension()) +
                          "D but the mesh is " + std::to_string(mesh.dimension()) + "D");
    FluxPtr flux = make_flux(config.flux, model);
    SolverState initial = initial_state(*model, mesh, config.initial, build_alpha(config.initial.alpha, mesh));

    RunSettings settings;
    settings.cfl = config.solver.cfl;
    settings.zeta = config.solver.zeta;
    settings.max_steps = config.solver.max_steps;
    settings.final_time = config.solver.final_time;
    settings.rtol = config.solver.rtol;
    settings.stop_on_convergence = config.solver.stop_on_convergence;
    settings.threads = config.solver.threads;
    settings.check_convex_combination = config.solver.check_convex;
    if (!config.solver.box.empty()) settings.box = parse_box(*model, config.solver.box);

    std::optional<double> lake_level;
    const StationarySpec& st = config.stationary;
    try {
        if (st.family == "lake") {
            double z0;
            if (st.z0) {
                z0 = *st.z0;
            } else {
                double volume = 0.0;
                for (std::size_t k = 0; k < mesh.cell_count(); ++k) volume += mesh.cells()[k].measure * initial.u[k][0];
                z0 = lake_level_from_volume(initial.alpha, mesh.cell_measures(), volume);
            }
            lake_level = z0;
            settings.target = stationary_state(*model, LakeAtRest{z0}, initial.alpha);
        } else if (st.family == "rest_gas") {
            settings.target = stationary_state(*model, RestingGas{st.temperature, st.pressure}, initial.alpha);
        } else if (st.family == "hydrostatic") {
            settings.target = stationary_state(
                *model, HydrostaticColumn{st.velocity, st.reduced_pressure, st.temperature}, initial.alpha);
        } else if (st.family != "none") {
            throw ConfigError("unknown stationary family '" + st.family + "'");
        }
    } catch (const DomainError& err) {
        throw ConfigError(std::string("stationary target: ") + err.what());
    }
    return Problem{std::move(model), std::move(mesh), std::move(flux), std::move(initial), std::move(settings),
                   lake_level};
}

}  // namespace ncbal
