#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "ncbal/errors.hpp"
#include "ncbal/mesh.hpp"

using namespace ncbal;

namespace {

void check_invariants(const Mesh& mesh) {
    CHECK(closure_defect(mesh) <= 1e-13);
    const double a = mesh.regularity();
    const double h = mesh.size();
    const int d = mesh.dimension();
    for (const auto& cell : mesh.cells()) {
        CHECK(cell.measure >= a * std::pow(h, d) * (1 - 1e-14));
        CHECK(cell.perimeter <= std::pow(h, d - 1) / a * (1 + 1e-14));
    }
    for (std::size_t f = 0; f < mesh.faces().size(); ++f) {
        const Face& face = mesh.faces()[f];
        CHECK(std::abs(face.normal.norm() - 1.0) <= 1e-15);
        if (face.is_wall()) continue;
        // The two directed views: opposite normals, equal measures.
        const Normal nl = mesh.outward_normal(face.left, face.left_local);
        const Normal nr = mesh.outward_normal(face.right, face.right_local);
        CHECK((nl + nr).norm() == 0.0);
        CHECK(mesh.neighbour(face.left, face.left_local) == face.right);
        CHECK(mesh.neighbour(face.right, face.right_local) == face.left);
    }
}

}  // namespace

TEST_CASE("uniform 1D mesh") {
    const Mesh m = build_uniform_1d(0, 1, 4);
    CHECK(m.cell_count() == 4);
    for (const auto& c : m.cells()) CHECK(c.measure == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(m.interior_face_count() == 3);
    CHECK(m.wall_face_count() == 2);
    std::vector<double> interfaces;
    for (const auto& f : m.faces()) {
        if (!f.is_wall()) interfaces.push_back(f.midpoint.x());
    }
    CHECK(interfaces == std::vector<double>{0.25, 0.5, 0.75});
    CHECK(m.regularity() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(m.size() == doctest::Approx(0.25));
    check_invariants(m);
    CHECK_THROWS_AS(build_uniform_1d(0, 1, 1), MeshValidationError);
}

TEST_CASE("periodic 1D mesh with two cells") {
    const Mesh m = build_uniform_1d(0, 1, 2, BoundaryKind::Periodic);
    CHECK(m.wall_face_count() == 0);
    for (int k = 0; k < 2; ++k) {
        CHECK(m.neighbour(k, 0) == 1 - k);
        CHECK(m.neighbour(k, 1) == 1 - k);
    }
    check_invariants(m);
}

TEST_CASE("structured 2D meshes") {
    const Mesh q = build_structured_2d(2, 2, Box2d{});
    CHECK(q.cell_count() == 4);
    CHECK(q.interior_face_count() == 4);
    CHECK(q.wall_face_count() == 8);
    check_invariants(q);

    const Mesh unit = build_structured_2d(3, 2, Box2d{0, 3, 0, 2});
    CHECK(unit.size() == doctest::Approx(std::sqrt(2.0)));
    CHECK(unit.regularity() == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-14));
    const RegularityQuotients rq = regularity_quotients(unit);
    CHECK(rq.min_volume_ratio == doctest::Approx(0.5));
    CHECK(rq.min_perimeter_ratio == doctest::Approx(std::sqrt(2.0) / 4.0));

    const Mesh tri = build_structured_2d(4, 3, Box2d{0, 2, -1, 1}, ElementKind::Triangle);
    CHECK(tri.cell_count() == 24);
    CHECK(tri.total_measure() == doctest::Approx(4.0));
    check_invariants(tri);
    CHECK_THROWS_AS(build_structured_2d(2, 2, Box2d{0, 0, 0, 1}), MeshValidationError);
    CHECK_THROWS_AS(build_structured_2d(1, 2, Box2d{}), MeshValidationError);
}

TEST_CASE("mesh text round trip") {
    for (const Mesh& m : {build_uniform_1d(0, 1, 4), build_uniform_1d(-1, 2, 7, BoundaryKind::Periodic),
                          build_structured_2d(3, 4, Box2d{0, 0.3, 0, 1.7}, ElementKind::Triangle)}) {
        const Mesh back = parse_mesh(format_mesh(m));
        CHECK(back == m);
    }
    const auto path = std::filesystem::temp_directory_path() / "ncbal_mesh_roundtrip.txt";
    const Mesh m = build_structured_2d(5, 2, Box2d{0.1, 0.7, 0.0, 1.0 / 3.0});
    save_mesh(m, path);
    CHECK(load_mesh(path) == m);
    std::filesystem::remove(path);
}

TEST_CASE("mesh parse errors") {
    SUBCASE("missing node reports its line") {
        const std::string text = "MESH d=1\nNODES 3\n0\n0.5\n1\nCELLS 2\n0 1\n1 7\n";
        try {
            parse_mesh(text);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 8);
        }
    }
    SUBCASE("empty cells section") {
        CHECK_THROWS_AS(parse_mesh("MESH d=2\nNODES 3\n0 0\n1 0\n0 1\nCELLS 0\n"), MeshValidationError);
    }
    SUBCASE("bad header") {
        try {
            parse_mesh("# comment\nMESH d=3\n");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
        }
    }
    SUBCASE("truncated coordinates") {
        try {
            parse_mesh("MESH d=2\nNODES 2\n0 0\n1\n");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 4);
        }
    }
    SUBCASE("duplicate interface") {
        // Three triangles sharing the edge 0-1.
        const std::string text =
            "MESH d=2\nNODES 5\n0 0\n1 0\n0.5 1\n0.5 -1\n0.5 2\nCELLS 3\n0 1 2\n1 0 3\n0 1 4\n";
        CHECK_THROWS_AS(parse_mesh(text), MeshValidationError);
    }
    SUBCASE("clockwise cell") {
        CHECK_THROWS_AS(parse_mesh("MESH d=2\nNODES 3\n0 0\n0 1\n1 0\nCELLS 1\n0 1 2\n"), MeshValidationError);
    }
    SUBCASE("unknown boundary tag") {
        CHECK_THROWS_AS(parse_mesh("MESH d=1\nNODES 3\n0\n1\n2\nCELLS 2\n0 1\n1 2\nBOUNDARY 1\n0 0 inflow\n"),
                        ParseError);
    }
    SUBCASE("periodic tag") {
        const Mesh m = parse_mesh("MESH d=1\nNODES 3\n0\n1\n2\nCELLS 2\n0 1\n1 2\nBOUNDARY 2\n0 0 periodic:1:1\n1 1 periodic:0:0\n");
        CHECK(m.wall_face_count() == 0);
    }
}

TEST_CASE("cell averages") {
    const Mesh m = build_uniform_1d(0, 1, 4);
    const auto c = project_cell_averages([](const Point&) { return 3.5; }, m, 2);
    for (double v : c) CHECK(v == 3.5);
    const auto lin = project_cell_averages([](const Point& p) { return p.x(); }, m, 1);
    CHECK(lin == std::vector<double>{0.125, 0.375, 0.625, 0.875});
    const auto step = project_cell_averages([](const Point& p) { return p.x() < 0.5 ? 0.0 : 0.5; }, m, 2);
    CHECK(step == std::vector<double>{0.0, 0.0, 0.5, 0.5});

    // Order 2 integrates quadratics exactly on triangles and quads.
    for (const Mesh& mm : {build_structured_2d(3, 3, Box2d{0, 1, 0, 2}, ElementKind::Triangle),
                           build_structured_2d(2, 3, Box2d{-1, 1, 0, 1})}) {
        const auto q = project_cell_averages([](const Point& p) { return p.x() * p.x() + 2 * p.x() * p.y(); }, mm, 2);
        double integral = 0.0;
        for (std::size_t k = 0; k < mm.cell_count(); ++k) integral += q[k] * mm.cells()[k].measure;
        const Point lo = mm.lower_corner(), hi = mm.upper_corner();
        auto prim = [](double x, double y) { return x * x * x / 3.0 * y + x * x * y * y / 2.0; };
        const double exact = prim(hi.x(), hi.y()) - prim(lo.x(), hi.y()) - prim(hi.x(), lo.y()) + prim(lo.x(), lo.y());
        CHECK(integral == doctest::Approx(exact).epsilon(1e-13));
    }
}
