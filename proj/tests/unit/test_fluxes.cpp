#include <cmath>
#include <random>

#include "doctest.h"
#include "ncbal/errors.hpp"
#include "ncbal/fluxes.hpp"
#include "test_support.hpp"

using namespace ncbal;
using namespace ncbal::testing;

namespace {

State sw1(double h, double q) {
    State s(2);
    s << h, q;
    return s;
}

const Normal kRight(1, 0);

}  // namespace

TEST_CASE("rusanov by hand") {
    auto m = make_model("sw1d");
    auto flux = make_rusanov(m);
    SUBCASE("still water over a flat bottom") {
        const FaceFlux f = flux->evaluate(sw1(1, 0), 0, sw1(1, 0), 0, kRight);
        CHECK(f.k_view[0] == 0.0);
        CHECK(f.k_view[1] == doctest::Approx(4.905));
    }
    SUBCASE("explicit formula") {
        // λ = max(|U|+√(gh)) = 0.5 + √(9.81·2) for the left state (U = 0.5).
        const State uk = sw1(2, 1), ul = sw1(1, -0.2);
        const double lam = std::max(0.5 + std::sqrt(9.81 * 2), 0.2 + std::sqrt(9.81));
        const double fk0 = 1.0, fk1 = 1.0 * 0.5 + 0.5 * 9.81 * 4;
        const double fl0 = -0.2, fl1 = 0.04 + 0.5 * 9.81;
        const FaceFlux f = flux->evaluate(uk, 0.3, ul, 0.3, kRight);
        CHECK(f.k_view[0] == doctest::Approx(0.5 * (fk0 + fl0) - 0.5 * lam * (1 - 2)).epsilon(1e-14));
        CHECK(f.k_view[1] == doctest::Approx(0.5 * (fk1 + fl1) - 0.5 * lam * (-0.2 - 1)).epsilon(1e-14));
        CHECK(flux->lipschitz(uk, 0.3, ul, 0.3, kRight) == doctest::Approx(1.05 * lam));
    }
    SUBCASE("not well-balanced over a step") {
        const State uk = sw1(1, 0), ul = sw1(0.5, 0);
        const State g = flux->evaluate(uk, 0.0, ul, 0.5, kRight).k_view;
        const State f = m->flux(uk, 0.0, kRight);
        CHECK((g - f).cwiseAbs().maxCoeff() > 1e-3);
    }
    SUBCASE("intermediate state") {
        const State uk = sw1(1, 0), ul = sw1(0.5, 0);
        const double lg = flux->lipschitz(uk, 0, ul, 0, kRight);
        const State w = intermediate_state(*flux, uk, 0, ul, 0, kRight, 1.0 / lg);
        CHECK(w[0] > 0.0);
        CHECK((intermediate_state(*flux, uk, 0, uk, 0, kRight, 0.7) - uk).cwiseAbs().maxCoeff() == 0.0);
        CHECK((intermediate_state(*flux, uk, 0, ul, 0, kRight, 0.0) - uk).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("hydrostatic reconstruction by hand") {
    auto m = make_model("sw1d");
    auto flux = make_hydrostatic(m);
    SUBCASE("lake at rest over a step") {
        const FaceFlux f = flux->evaluate(sw1(1, 0), 0.0, sw1(0.5, 0), 0.5, kRight);
        CHECK(f.k_view[0] == 0.0);
        CHECK(f.k_view[1] == doctest::Approx(4.905).epsilon(1e-15));
        // Seen from the shallow side the wall pressure is g/2·0.25 pushing back.
        CHECK(f.l_view[1] == doctest::Approx(-0.5 * 9.81 * 0.25).epsilon(1e-15));
    }
    SUBCASE("flat bottom equals rusanov") {
        auto rus = make_rusanov(m);
        std::mt19937_64 rng(4);
        for (int s = 0; s < 200; ++s) {
            const State uk = sw1(uniform(rng, 0.5, 2), uniform(rng, -1, 1));
            const State ul = sw1(uniform(rng, 0.5, 2), uniform(rng, -1, 1));
            const double a = uniform(rng, -1, 1);
            const FaceFlux fh = flux->evaluate(uk, a, ul, a, kRight);
            const FaceFlux fr = rus->evaluate(uk, a, ul, a, kRight);
            CHECK((fh.k_view - fr.k_view).cwiseAbs().maxCoeff() == 0.0);
            CHECK((fh.l_view - fr.l_view).cwiseAbs().maxCoeff() == 0.0);
            // The entropy fluxes differ only by the α-dependent part of η, which cancels in the jump.
            CHECK(fh.entropy == doctest::Approx(fr.entropy).epsilon(1e-12));
        }
    }
    SUBCASE("dry reconstruction") {
        CHECK_THROWS_AS(flux->evaluate(sw1(0.2, 0), 0.0, sw1(1, 0), 0.5, kRight), DomainError);
    }
    SUBCASE("2D lake at rest, arbitrary normal") {
        auto m2 = make_model("sw2d");
        auto f2 = make_hydrostatic(m2);
        const Normal n(0.6, -0.8);
        State uk(3), ul(3);
        uk << 1.3, 0, 0;
        ul << 0.4, 0, 0;
        const State g = f2->evaluate(uk, 0.2, ul, 1.1, n).k_view;
        const State f = m2->flux(uk, 0.2, n);
        CHECK((g - f).cwiseAbs().maxCoeff() <= 1e-14);
    }
    CHECK_THROWS_AS(make_hydrostatic(make_model("porous_euler")), ConfigError);
}

TEST_CASE("acoustic flux") {
    auto m = make_model("lagrangian");
    auto flux = make_acoustic(m);
    State prim(3);
    // τ = 0.4, e = 2.5: p = 0.4·2.5/0.4 = 2.5.
    prim << 0.4, 0.0, 2.5;
    const State uk = m->from_primitive(prim, 1.5);
    prim << 0.8, 0.0, 2.5;  // p = 1.25
    const State ul = m->from_primitive(prim, 0.25);
    const FaceFlux f = flux->evaluate(uk, 1.5, ul, 0.25, kRight);
    CHECK(std::abs(f.k_view[0]) <= 1e-15);
    CHECK(f.k_view[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(f.k_view[2]) <= 1e-15);
    CHECK(f.entropy == 0.0);

    // Constant (U, P) with U ≠ 0 is reproduced exactly.
    prim << 0.5, 0.3, 2.0;
    const State a = m->from_primitive(prim, 0.2);
    const double p = 0.4 * 2.0 / 0.5;
    const double tau_b = 0.4 * 3.0 / (p - 0.2 + 0.7);
    prim << tau_b, 0.3, 3.0;
    const State b = m->from_primitive(prim, 0.7);
    const State g = flux->evaluate(a, 0.2, b, 0.7, kRight).k_view;
    CHECK((g - m->flux(a, 0.2, kRight)).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK_THROWS_AS(make_acoustic(make_model("sw1d")), ConfigError);
}

TEST_CASE("tadmor gamma") {
    auto m = make_model("sw1d");
    auto flux = make_rusanov(m);
    const State u = sw1(1.2, 0.3);
    CHECK(tadmor_gamma(*flux, u, 0.1, u, 0.1, kRight) == doctest::Approx(m->entropy_flux(u, 0.1, kRight)));
    // Still states: F·n = 0, so Γ = ∂η(w_K)·g.
    const State a = sw1(1, 0), b = sw1(0.8, 0);
    const State g = flux->evaluate(a, 0, b, 0, kRight).k_view;
    CHECK(tadmor_gamma(*flux, a, 0, b, 0, kRight) ==
          doctest::Approx(m->entropy_gradient(a, 0).dot(g)).epsilon(1e-14));
}

TEST_CASE("contract certification") {
    SUBCASE("rusanov on shallow water") {
        auto m = make_model("sw1d");
        SampleSpec spec;
        spec.box = parse_box(*m, "h=0.5:2,U=-1:1,alpha=0:0");
        spec.samples = 10000;
        spec.seed = 7;
        const ContractReport r = certify_contracts(*make_rusanov(m), spec);
        for (const char* name : {"F1", "F2", "F3", "F4", "GAP", "G-conservative"}) {
            CAPTURE(name);
            CHECK(r.find(name)->status == "pass");
        }
        CHECK(r.find("F1")->worst <= 1e-14);
        CHECK(r.find("F5")->status == "fail");
        CHECK(r.find("F5")->worst > 1e-3);
        CHECK(r.find("F5")->witness >= 0);
        CHECK_FALSE(r.passed());
        CHECK(r.to_csv().find("F5,fail") != std::string::npos);
    }
    SUBCASE("hydrostatic on shallow water in 2D") {
        auto m = make_model("sw2d");
        SampleSpec spec;
        spec.box = parse_box(*m, "h=0.5:2,U=-0.7:0.7,V=-0.7:0.7,alpha=0:0");
        spec.samples = 5000;
        const ContractReport r = certify_contracts(*make_hydrostatic(m), spec);
        for (const char* name : {"F1", "F2", "F3", "F4", "GAP", "G-conservative", "F5"}) {
            CAPTURE(name);
            CHECK(r.find(name)->status == "pass");
        }
        CHECK(r.find("F5")->worst <= 1e-13 * 2 * 9.81 * 4);
        CHECK(r.passed());
    }
    SUBCASE("requested subset") {
        auto m = make_model("sw1d");
        SampleSpec spec;
        spec.box = parse_box(*m, "h=0.5:2,U=-1:1");
        spec.samples = 500;
        spec.contracts = {"F1", "F2", "F3"};
        CHECK(certify_contracts(*make_rusanov(m), spec).passed());
        spec.contracts = {"F9"};
        CHECK_THROWS_AS(certify_contracts(*make_rusanov(m), spec), ConfigError);
        spec.contracts = {};
        spec.samples = 0;
        CHECK_THROWS_AS(certify_contracts(*make_rusanov(m), spec), ConfigError);
    }
    SUBCASE("deterministic for a fixed seed") {
        auto m = make_model("sw1d");
        SampleSpec spec;
        spec.box = parse_box(*m, "h=0.5:2,U=-1:1");
        spec.samples = 300;
        spec.seed = 99;
        CHECK(certify_contracts(*make_hydrostatic(m), spec).to_csv() ==
              certify_contracts(*make_hydrostatic(m), spec).to_csv());
    }
}
