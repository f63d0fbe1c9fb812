#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "krein/billiard.hpp"
#include "test_util.hpp"

using namespace krein;
using Catch::Approx;

namespace {
const Complex I(0.0, 1.0);
}

TEST_CASE("hyperbola points") {
    auto frame = HyperbolaFrame::from_angle(0.3);
    SECTION("vertices at +-1") {
        CHECK(std::abs(hyperbola_point(frame, 0.0, +1) - 1.0) < 1e-15);
        CHECK(std::abs(hyperbola_point(frame, 0.0, -1) + 1.0) < 1e-15);
    }
    SECTION("squared value is 1 + i p s") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> uxi(-pi / 2.0, pi / 2.0 - 1e-9), us(-20.0, 20.0);
        for (int trial = 0; trial < 1000; ++trial) {
            auto f = HyperbolaFrame::from_angle(uxi(rng));
            const double s = us(rng);
            for (int branch : {+1, -1}) {
                const Complex z = hyperbola_point(f, s, branch);
                CHECK(std::abs(z * z - (1.0 + I * f.p * s)) < 1e-12 * (1.0 + std::abs(s)));
            }
        }
    }
    SECTION("degenerate frame maps to the axes") {
        auto d = HyperbolaFrame::from_angle(-pi / 2.0);
        CHECK(d.degenerate());
        CHECK(std::abs(hyperbola_point(d, 3.0, +1) - 2.0) < 1e-15);          // sqrt(1+3)
        CHECK(std::abs(hyperbola_point(d, -5.0, +1) - (-2.0 * I)) < 1e-15);  // axes branch
    }
    SECTION("angle validation") {
        CHECK_THROWS_AS(HyperbolaFrame::from_angle(pi / 2.0), InvalidInput);
        CHECK_THROWS_AS(HyperbolaFrame::from_angle(-2.0), InvalidInput);
    }
}

TEST_CASE("ray-hyperbola intersection") {
    SECTION("upward ray from 1 in the degenerate frame never returns") {
        // start 1, velocity -w^2 m1 = 2i for w = 1-i, m1 = 1: Im((1+2it)^2) = 4t
        auto frame = HyperbolaFrame::from_angle(-pi / 2.0);
        auto hit = ray_hyperbola_intersect(Complex(1.0), Complex(0.0, 2.0), frame);
        CHECK(!hit.has_value());
    }
    SECTION("hit point lands on the line") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> uxi(-pi / 2.0 + 0.05, pi / 2.0 - 0.05);
        std::uniform_real_distribution<double> ur(-2.0, 2.0);
        int hits = 0;
        for (int trial = 0; trial < 500; ++trial) {
            auto f = HyperbolaFrame::from_angle(uxi(rng));
            const Complex start(1.0, 0.0);
            const Complex v(ur(rng), ur(rng));
            if (std::abs(v) < 1e-3) continue;
            auto hit = ray_hyperbola_intersect(start, v, f);
            if (!hit) continue;
            ++hits;
            const Complex z = start + hit->t * v;
            CHECK(std::abs(dot(z * z - 1.0, f.p)) < 1e-12 * (1.0 + std::abs(z * z)));
            CHECK(std::abs(z * z - (1.0 + I * f.p * hit->s)) <
                  1e-10 * (1.0 + std::abs(hit->s)));
        }
        CHECK(hits > 100);
    }
    SECTION("starting on the hyperbola excludes t = 0") {
        auto f = HyperbolaFrame::from_angle(0.2);
        const Complex start = hyperbola_point(f, 1.5, +1);
        auto hit = ray_hyperbola_intersect(start, Complex(-0.4, 0.9), f);
        if (hit) CHECK(hit->t > 1e-10);
    }
}

TEST_CASE("reconstruction, circle case") {
    // w = 1 - i lies on |w + i| = 1 for budget 1: single mass at 0.5
    auto r = reconstruct(Complex(1.0, -1.0), 1.0, HyperbolaFrame::from_angle(0.4), 1.0, 1.0);
    REQUIRE(r.feasible);
    CHECK(r.termination == Reconstruction::Termination::circle);
    REQUIRE(r.masses() == 1);
    CHECK(r.string.position[0] == Approx(0.5).margin(1e-12));
    CHECK(r.string.mass[0] == Approx(1.0));
    CHECK(std::abs(r.boundary_residual) < 1e-12);
    CHECK(r.mass_residual == Approx(0.0).margin(1e-12));
    auto rep = check_structure(r);
    CHECK(rep.all_pass);
}

TEST_CASE("reconstruction, single mass at the left end") {
    // w = 1 - i/2 is the quasi-eigenvalue of 0.8 delta_0 on [0, 1]
    auto r = reconstruct(Complex(1.0, -0.5), 0.8, HyperbolaFrame::from_angle(-pi / 2.0), 1.0,
                         1.0);
    REQUIRE(r.feasible);
    REQUIRE(r.masses() == 1);
    CHECK(r.string.position[0] == 0.0);
    CHECK(r.string.mass[0] == Approx(0.8));
    CHECK(std::abs(r.boundary_residual) < 1e-10);
    auto rep = check_structure(r);
    CHECK(rep.all_pass);
}

TEST_CASE("reconstruction rejects bad parameters") {
    CHECK_THROWS_AS(reconstruct(Complex(-1.0, -1.0), 1.0, HyperbolaFrame{}, 1.0, 1.0),
                    InvalidInput);
    CHECK_THROWS_AS(reconstruct(Complex(1.0, 0.5), 1.0, HyperbolaFrame{}, 1.0, 1.0),
                    InvalidInput);
    CHECK_THROWS_AS(reconstruct(Complex(1.0, -1.0), -0.3, HyperbolaFrame{}, 1.0, 1.0),
                    InvalidInput);
}

TEST_CASE("forward map diagnostics for generic parameters") {
    // generic parameters give a string whose residual is genuinely nonzero
    auto r = reconstruct(Complex(1.3, -0.4), 0.5, HyperbolaFrame::from_angle(0.7), 1.0, 1.0);
    if (r.feasible) {
        CHECK(r.masses() >= 1);
        // the two routes to the mode agree at the vertices
        for (std::size_t j = 0; j < r.masses(); ++j)
            CHECK(std::abs(r.vertex_mode[j] - r.trajectory.vertex_value[j]) <
                  1e-12 * (1.0 + std::abs(r.vertex_mode[j])));
        // vertex squares sit on the supporting line
        for (std::size_t j = 0; j < r.masses(); ++j) {
            const Complex sq = r.vertex_mode[j] * r.vertex_mode[j];
            CHECK(std::abs(dot(sq - 1.0, r.frame.p)) < 1e-11 * (1.0 + std::abs(sq)));
        }
    }
}

TEST_CASE("vertex consistency across many parameter draws") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> ua(0.3, 3.0), ub(0.1, 2.0), um(0.05, 1.0),
        uxi(-pi / 2.0, pi / 2.0 - 1e-6);
    int feasible = 0, multi = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const Complex w(ua(rng), -ub(rng));
        auto r = reconstruct(w, um(rng), HyperbolaFrame::from_angle(uxi(rng)), 1.0, 1.0);
        if (!r.feasible) continue;
        ++feasible;
        if (r.masses() >= 2) ++multi;
        for (std::size_t j = 0; j < r.masses(); ++j) {
            CHECK(std::abs(r.vertex_mode[j] - r.trajectory.vertex_value[j]) <
                  1e-11 * (1.0 + std::abs(r.vertex_mode[j])));
            const Complex sq = r.vertex_mode[j] * r.vertex_mode[j];
            CHECK(std::abs(dot(sq - 1.0, r.frame.p)) < 1e-10 * (1.0 + std::abs(sq)));
            CHECK(r.string.mass[j] > 0.0);
        }
        // s-values decrease strictly along the construction
        for (std::size_t j = 0; j + 1 < r.s_values.size(); ++j)
            CHECK(r.s_values[j] > r.s_values[j + 1]);
    }
    CHECK(feasible > 50);
    CHECK(multi > 5);
}

TEST_CASE("structure report flags a broken reflection law") {
    // find a feasible two-mass reconstruction, then perturb its second mass
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> ua(0.8, 3.0), ub(0.1, 1.2), um(0.05, 1.0),
        uxi(-pi / 2.0 + 0.1, pi / 2.0 - 0.1);
    for (int trial = 0; trial < 2000; ++trial) {
        const Complex w(ua(rng), -ub(rng));
        auto r = reconstruct(w, um(rng), HyperbolaFrame::from_angle(uxi(rng)), 1.0, 1.0);
        if (!r.feasible || r.masses() < 2 || r.string.position[1] >= 1.0) continue;

        auto broken = r;
        std::vector<double> mass = r.string.mass;
        mass[1] *= 1.01;
        broken.string = make_discrete_string(r.string.position, mass, Interval{1.0});
        broken.trajectory = mode_at_vertices(broken.string, w);
        auto rep = check_structure(broken);
        double reflect = 0.0;
        for (const auto& chk : rep.checks)
            if (chk.name == "reflection_law") reflect = chk.residual;
        CHECK(reflect > 1e-3);
        CHECK(!rep.all_pass);
        return;
    }
    FAIL("no two-mass reconstruction found for the negative control");
}
