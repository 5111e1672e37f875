#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "ncbal/simulation.hpp"

namespace ncbal {

struct MeshSpec {
    std::string builder = "uniform_1d";  ///< uniform_1d | structured_2d | file
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
    int cells = 100;
    int nx = 16, ny = 16;
    BoundaryKind boundary = BoundaryKind::Wall;
    ElementKind element = ElementKind::Quad;
    std::filesystem::path file;
};

/// α as a function of x: flat, a step at `position`, a linear ramp over the mesh, or one value
/// per cell read from a file.
struct AlphaSpec {
    std::string kind = "flat";  ///< flat | step | ramp | file
    double value = 0.0;
    double left = 0.0, right = 0.0;
    double position = 0.5;
    std::filesystem::path file;
};

struct InitialSpec {
    /// lake_at_rest | perturbed_lake | dam_break | hydrostatic_column | resting_gas
    std::string preset = "lake_at_rest";
    double z0 = 1.0;
    std::string profile = "cosine";  ///< perturbed_lake: cosine | compact
    double amplitude = 0.1;          ///< relative to z0
    double center_x = 0.5, center_y = 0.5;
    double radius = 0.1;
    double h_left = 2.0, h_right = 1.0, position = 0.5;  ///< dam_break
    double velocity = 0.0;
    double reduced_pressure = 1.0;  ///< hydrostatic_column: p − α
    double temperature = 1.0;
    double pressure = 1.0;  ///< resting_gas
    AlphaSpec alpha;
};

struct StationarySpec {
    std::string family = "none";  ///< lake | rest_gas | hydrostatic | none
    std::optional<double> z0;     ///< empty means "auto": from the initial volume
    double temperature = 1.0;
    double pressure = 1.0;
    double velocity = 0.0;
    double reduced_pressure = 1.0;
};

struct SolverSpec {
    CflMode cfl = CflMode::Strengthened;
    double zeta = 0.1;
    long max_steps = 1000;
    std::optional<double> final_time;
    double rtol = 1e-10;
    bool stop_on_convergence = false;
    int threads = 1;
    std::string box;
    bool check_convex = false;
};

struct OutputSpec {
    std::filesystem::path directory = ".";
    std::string diagnostics = "diagnostics.csv";
    long snapshot_every = 0;  ///< 0: initial and final snapshot only
    std::string snapshot_prefix = "snapshot";
};

struct RunConfig {
    std::string model = "sw1d";
    ModelParams params;
    MeshSpec mesh;
    InitialSpec initial;
    std::string flux = "hydrostatic";
    SolverSpec solver;
    StationarySpec stationary;
    OutputSpec output;
};

/// Sections `[model] [mesh] [initial] [flux] [solver] [stationary] [output]` of `key = value`
/// lines, `#` comments. Throws ParseError (with the line) on syntax errors and unknown keys,
/// ConfigError on out-of-range values. Relative paths are resolved against `base_dir`.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

/// Everything a run needs, built from a config.
struct Problem {
    ModelPtr model;
    Mesh mesh;
    FluxPtr flux;
    SolverState initial;
    RunSettings settings;
    std::optional<double> lake_level;  ///< Z₀ of a lake target
};

/// Throws ConfigError when the presets cannot be realised (dry cells, unknown names, bad files).
Problem build_problem(const RunConfig& config);

Mesh build_mesh(const MeshSpec& spec);
std::vector<double> build_alpha(const AlphaSpec& spec, const Mesh& mesh);

}  // namespace ncbal
