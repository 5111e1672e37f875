#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ncbal/config.hpp"
#include "ncbal/errors.hpp"

using namespace ncbal;
namespace fs = std::filesystem;

namespace {

int parse_error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 0;
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "ncbal_test_config";
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("parsing") {
    SUBCASE("defaults") {
        const RunConfig c = parse_config("");
        CHECK(c.model == "sw1d");
        CHECK(c.flux == "hydrostatic");
        CHECK(c.solver.cfl == CflMode::Strengthened);
        CHECK(c.solver.zeta == 0.1);
        CHECK(c.output.diagnostics == "diagnostics.csv");
        CHECK_FALSE(c.stationary.z0.has_value());
    }
    SUBCASE("values, comments and whitespace") {
        const RunConfig c = parse_config(
            "# leading comment\n"
            "[model]\n  name = sw2d   # trailing\ngravity=2.5\n"
            "[mesh]\nbuilder = structured_2d\nnx = 3\nny = 4\nelement = triangle\n"
            "[solver]\ncfl = basic\nzeta = 0.25\nfinal_time = 0.5\nstop_on_convergence = false\n"
            "[stationary]\nfamily = lake\nz0 = 1.5\n",
            "/base");
        CHECK(c.model == "sw2d");
        CHECK(c.params.gravity == 2.5);
        CHECK(c.mesh.nx == 3);
        CHECK(c.mesh.ny == 4);
        CHECK(c.mesh.element == ElementKind::Triangle);
        CHECK(c.solver.cfl == CflMode::Basic);
        CHECK(c.solver.zeta == 0.25);
        CHECK(c.solver.final_time == 0.5);
        CHECK(c.stationary.z0 == 1.5);
    }
    SUBCASE("relative paths resolve against the base directory") {
        const RunConfig c = parse_config("[output]\ndirectory = out/x\n", "/some/where");
        CHECK(c.output.directory == fs::path("/some/where/out/x"));
        CHECK(parse_config("[output]\ndirectory = /abs\n", "/b").output.directory == fs::path("/abs"));
    }
    SUBCASE("z0 auto") {
        CHECK_FALSE(parse_config("[stationary]\nz0 = auto\n").stationary.z0.has_value());
    }
}

TEST_CASE("parse errors carry the line") {
    CHECK(parse_error_line("[model]\nname = sw1d\n[bogus]\n") == 3);
    CHECK(parse_error_line("[model]\nspeed = 3\n") == 2);
    CHECK(parse_error_line("[solver]\n\n# c\nzeta = abc\n") == 4);
    CHECK(parse_error_line("[solver]\nstop_on_convergence = maybe\n") == 2);
    CHECK(parse_error_line("name = sw1d\n") == 1);
    CHECK(parse_error_line("[model\n") == 1);
    CHECK(parse_error_line("[model]\nname sw1d\n") == 2);
    CHECK(parse_error_line("[mesh]\ncells = 1.5\n") == 2);
}

TEST_CASE("out-of-range values") {
    CHECK_THROWS_AS(parse_config("[solver]\nzeta = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[solver]\nzeta = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[solver]\nmax_steps = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[solver]\nthreads = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[solver]\nrtol = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[model]\ngravity = -1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[model]\ngamma = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[mesh]\nbuilder = file\nfile = /nonexistent/mesh.txt\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), ConfigError);
}

TEST_CASE("alpha profiles") {
    const Mesh mesh = build_uniform_1d(0, 1, 4);
    AlphaSpec flat;
    flat.value = 0.3;
    CHECK(build_alpha(flat, mesh) == std::vector<double>(4, 0.3));

    AlphaSpec step;
    step.kind = "step";
    step.left = 0.0;
    step.right = 1.0;
    step.position = 0.375;
    CHECK(build_alpha(step, mesh) == std::vector<double>{0.0, 0.5, 1.0, 1.0});

    AlphaSpec ramp;
    ramp.kind = "ramp";
    ramp.left = 0.0;
    ramp.right = 1.0;
    const auto r = build_alpha(ramp, mesh);
    for (int k = 0; k < 4; ++k) CHECK(r[k] == doctest::Approx(0.125 + 0.25 * k).epsilon(1e-14));

    SUBCASE("step on triangles is exact") {
        const Mesh tri = build_structured_2d(4, 2, Box2d{}, ElementKind::Triangle);
        const auto a = build_alpha(step, tri);
        double integral = 0.0;
        for (std::size_t k = 0; k < tri.cell_count(); ++k) {
            CHECK(a[k] >= 0.0);
            CHECK(a[k] <= 1.0);
            integral += tri.cells()[k].measure * a[k];
        }
        CHECK(integral == doctest::Approx(0.625).epsilon(1e-14));
    }
    SUBCASE("file") {
        const fs::path p = scratch_dir() / "alpha.txt";
        std::ofstream(p) << "# bathymetry\n0.1\n0.2\n\n0.3\n0.4\n";
        AlphaSpec f;
        f.kind = "file";
        f.file = p;
        CHECK(build_alpha(f, mesh) == std::vector<double>{0.1, 0.2, 0.3, 0.4});
        std::ofstream(p) << "0.1\n0.2\n";
        CHECK_THROWS_AS(build_alpha(f, mesh), ConfigError);
    }
    AlphaSpec bad;
    bad.kind = "spline";
    CHECK_THROWS_AS(build_alpha(bad, mesh), ConfigError);
}

TEST_CASE("problems from presets") {
    SUBCASE("lake at rest") {
        const Problem p = build_problem(parse_config(
            "[mesh]\ncells = 10\n[initial]\npreset = lake_at_rest\nz0 = 1.5\nalpha = step\nalpha_right = 0.5\n"
            "[solver]\nbox = h=0.5:2,U=-1:1,alpha=0:0.5\n[stationary]\nfamily = lake\n"));
        REQUIRE(p.lake_level.has_value());
        CHECK(*p.lake_level == doctest::Approx(1.5).epsilon(1e-15));
        for (std::size_t k = 0; k < 10; ++k) {
            CHECK(p.initial.u[k][0] + p.initial.alpha[k] == doctest::Approx(1.5).epsilon(1e-15));
            CHECK(p.initial.u[k][1] == 0.0);
        }
        REQUIRE(p.settings.target.has_value());
        CHECK(p.settings.box.has_value());
    }
    SUBCASE("perturbed lake keeps the volume of its auto level") {
        const Problem p = build_problem(parse_config(
            "[model]\ngravity = 1\n[mesh]\ncells = 32\n"
            "[initial]\npreset = perturbed_lake\namplitude = 0.1\nalpha = step\nalpha_right = 0.2\n"
            "[stationary]\nfamily = lake\n"));
        double volume = 0.0, target = 0.0;
        for (std::size_t k = 0; k < p.mesh.cell_count(); ++k) {
            volume += p.mesh.cells()[k].measure * p.initial.u[k][0];
            target += p.mesh.cells()[k].measure * p.settings.target->states[k][0];
        }
        CHECK(target == doctest::Approx(volume).epsilon(1e-14));
        CHECK(*p.lake_level == doctest::Approx(1.0).epsilon(1e-3));
    }
    SUBCASE("dam break") {
        const Problem p = build_problem(parse_config("[mesh]\ncells = 4\n[initial]\npreset = dam_break\nposition = 0.375\n"));
        CHECK(p.initial.u[0][0] == 2.0);
        CHECK(p.initial.u[1][0] == 1.5);
        CHECK(p.initial.u[3][0] == 1.0);
    }
    SUBCASE("hydrostatic column") {
        const Problem p = build_problem(parse_config(
            "[model]\nname = lagrangian\n[mesh]\ncells = 8\n[initial]\npreset = hydrostatic_column\nalpha = ramp\n"
            "alpha_right = 1\n[flux]\nname = acoustic\n[stationary]\nfamily = hydrostatic\n"));
        for (std::size_t k = 0; k < 8; ++k) CHECK((p.initial.u[k] - p.settings.target->states[k]).norm() <= 1e-15);
    }
    SUBCASE("surface below the bathymetry") {
        CHECK_THROWS_AS(build_problem(parse_config("[initial]\nz0 = 0.2\nalpha = flat\nalpha_value = 0.5\n")),
                        ConfigError);
        CHECK_THROWS_AS(build_problem(parse_config("[initial]\nalpha_value = 0.5\n[stationary]\nfamily = lake\nz0 = 0.1\n")),
                        ConfigError);
    }
    SUBCASE("mismatches") {
        CHECK_THROWS_AS(build_problem(parse_config("[initial]\npreset = resting_gas\n")), ConfigError);
        CHECK_THROWS_AS(build_problem(parse_config("[model]\nname = sw2d\n")), ConfigError);
        CHECK_THROWS_AS(build_problem(parse_config("[initial]\npreset = tsunami\n")), ConfigError);
        CHECK_THROWS_AS(build_problem(parse_config("[flux]\nname = roe\n")), ConfigError);
        CHECK_THROWS_AS(build_problem(parse_config("[stationary]\nfamily = vortex\n")), ConfigError);
        CHECK_THROWS_AS(build_problem(parse_config("[mesh]\nbuilder = structured_2d\nboundary = periodic\n[model]\nname = sw2d\n")),
                        ConfigError);
    }
}

TEST_CASE("shipped configs build") {
    const fs::path dir = fs::path(NCBAL_SOURCE_DIR) / "configs";
    int count = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".cfg") continue;
        CAPTURE(entry.path());
        const Problem p = build_problem(load_config(entry.path()));
        CHECK(p.mesh.cell_count() > 0);
        ++count;
    }
    CHECK(count >= 5);
}
