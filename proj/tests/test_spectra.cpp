#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "krein/spectra.hpp"
#include "test_util.hpp"

using namespace krein;
using Catch::Approx;

TEST_CASE("characteristic polynomial coefficients") {
    SECTION("zero measure is the constant 1") {
        auto p = char_poly(make_discrete_string({}, {}, Interval{1.0}));
        REQUIRE(p.size() == 1);
        CHECK(p[0] == Complex(1.0));
    }
    SECTION("mass at the right end: 1 - i z m0") {
        auto p = char_poly(make_discrete_string({1.0}, {0.7}, Interval{1.0}));
        REQUIRE(p.size() == 2);
        CHECK(p[0] == Complex(1.0));
        CHECK(p[1] == Complex(0.0, -0.7));
    }
    SECTION("interior mass gives the quadratic with known roots") {
        auto p = char_poly(make_discrete_string({0.5}, {1.0}, Interval{1.0}));
        REQUIRE(p.size() == 3);
        auto roots = detail::polynomial_roots(p);
        REQUIRE(roots.size() == 2);
        std::sort(roots.begin(), roots.end(),
                  [](Complex a, Complex b) { return a.real() < b.real(); });
        CHECK(std::abs(roots[0] - Complex(-1.0, -1.0)) < 1e-12);
        CHECK(std::abs(roots[1] - Complex(1.0, -1.0)) < 1e-12);
    }
}

TEST_CASE("spectrum_poly") {
    SECTION("double root at -i/2 with multiplicity 2") {
        auto ev = spectrum_poly(make_discrete_string({0.0}, {4.0}, Interval{1.0}));
        REQUIRE(ev.size() == 1);
        CHECK(ev[0].multiplicity == 2);
        CHECK(std::abs(ev[0].omega - Complex(0.0, -0.5)) < 1e-9);
    }
    SECTION("mass 0.8 at the left end") {
        auto ev = spectrum_poly(make_discrete_string({0.0}, {0.8}, Interval{1.0}));
        REQUIRE(ev.size() == 2);
        CHECK(std::abs(ev[0].omega - Complex(-1.0, -0.5)) < 1e-12);
        CHECK(std::abs(ev[1].omega - Complex(1.0, -0.5)) < 1e-12);
    }
    SECTION("two equal masses, frozen regression") {
        // independent companion-matrix oracle values computed ahead of the build
        auto ev = spectrum_poly(make_discrete_string({0.0, 1.0}, {0.5, 0.5}, Interval{1.0}));
        REQUIRE(ev.size() == 3);
        CHECK(std::abs(ev[0].omega - Complex(-1.721433237247137, -0.352201128738958)) < 1e-12);
        CHECK(std::abs(ev[1].omega - Complex(0.0, -1.295597742522084)) < 1e-12);
        CHECK(std::abs(ev[2].omega - Complex(1.721433237247137, -0.352201128738958)) < 1e-12);
    }
    SECTION("all roots lie in the open lower half-plane") {
        std::mt19937_64 rng(61);
        for (int trial = 0; trial < 100; ++trial) {
            auto s = test_util::random_string(rng, 4, 5.0);
            for (const auto& ev : spectrum_poly(s)) {
                CHECK(ev.omega.imag() < 0.0);
                CHECK(std::abs(ev.omega) > 0.0);
                if (ev.multiplicity == 1) {
                    // Newton correction estimates the root error for simple roots
                    const Complex corr =
                        char_det(s, ev.omega).value / char_det_dz(s, ev.omega);
                    CHECK(std::abs(corr) < 1e-9 * (1.0 + std::abs(ev.omega)));
                }
            }
        }
    }
    SECTION("mirror symmetry of the root set") {
        std::mt19937_64 rng(67);
        for (int trial = 0; trial < 50; ++trial) {
            auto s = test_util::random_string(rng, 3, 3.0);
            auto ev = spectrum_poly(s);
            for (const auto& e : ev) {
                const Complex mirror = -std::conj(e.omega);
                double best = 1e9;
                for (const auto& f : ev) best = std::min(best, std::abs(f.omega - mirror));
                CHECK(best < 1e-7 * (1.0 + std::abs(e.omega)));
            }
        }
    }
    SECTION("purely imaginary roots respect the mass bound") {
        std::mt19937_64 rng(71);
        for (int trial = 0; trial < 200; ++trial) {
            auto s = test_util::random_string(rng, 3, 3.0);
            const double bound = 1.0 / total_mass(s);
            for (const auto& e : spectrum_poly(s)) {
                if (std::abs(e.omega.real()) < 1e-9 * (1.0 + std::abs(e.omega)))
                    CHECK(e.decay_rate() >= bound - 1e-7);
            }
        }
    }
}

TEST_CASE("spectrum_contour") {
    SECTION("single interior mass") {
        auto s = make_discrete_string({0.5}, {1.0}, Interval{1.0});
        auto ev = spectrum_contour(s, SearchRegion{0.0, 2.0, 0.5, 2.0});
        REQUIRE(ev.size() == 1);
        CHECK(ev[0].multiplicity == 1);
        CHECK(std::abs(ev[0].omega - Complex(1.0, -1.0)) < 1e-12);
    }
    SECTION("layered density c = 4") {
        auto m = as_measure(make_layered_density({{{0.0, 1.0, 4.0}}}, Interval{1.0}));
        auto ev = spectrum_contour(m, SearchRegion{1.0, 2.0, 0.1, 0.5});
        REQUIRE(ev.size() == 1);
        CHECK(std::abs(ev[0].omega - Complex(pi / 2.0, -std::log(3.0) / 4.0)) < 1e-10);
    }
    SECTION("double root reported with multiplicity 2") {
        auto s = make_discrete_string({0.0}, {4.0}, Interval{1.0});
        auto ev = spectrum_contour(s, SearchRegion{-0.4, 0.4, 0.2, 1.0});
        REQUIRE(ev.size() == 1);
        CHECK(ev[0].multiplicity == 2);
        CHECK(std::abs(ev[0].omega - Complex(0.0, -0.5)) < 1e-6);
    }
    SECTION("empty region") {
        auto s = make_discrete_string({0.5}, {1.0}, Interval{1.0});
        auto ev = spectrum_contour(s, SearchRegion{3.0, 4.0, 0.1, 0.4});
        CHECK(ev.empty());
    }
    SECTION("invalid region rejected") {
        auto s = make_discrete_string({0.5}, {1.0}, Interval{1.0});
        CHECK_THROWS_AS(spectrum_contour(s, SearchRegion{0.0, 1.0, -0.5, 1.0}), InvalidInput);
    }
}

TEST_CASE("winding count is stable under subdivision") {
    // the total number of zeros in a region equals the sum over any partition
    auto s = make_discrete_string({0.0, 0.45, 1.0}, {0.5, 0.7, 0.3}, Interval{1.0});
    const auto eval = [&](Complex z) { return char_det_transfer(as_measure(s), z); };
    detail::ContourEngine engine{eval, ContourOptions{}, 0};
    detail::Cell whole{-4.0, 4.0, 0.05, 4.0};
    auto total = engine.winding(whole);
    REQUIRE(total.ok);
    int sum = 0;
    const double cuts[5] = {-4.0, -1.3, 0.2, 2.1, 4.0};
    for (int k = 0; k < 4; ++k) {
        detail::Cell part{cuts[k], cuts[k + 1], 0.05, 4.0};
        auto w = engine.winding(part);
        REQUIRE(w.ok);
        sum += w.winding;
    }
    CHECK(sum == total.winding);
    int inside = 0;
    for (const auto& e : spectrum_poly(s)) {
        const double a = e.omega.real(), b = e.decay_rate();
        if (a > whole.alo && a < whole.ahi && b > whole.blo && b < whole.bhi)
            inside += e.multiplicity;
    }
    CHECK(total.winding == inside);
}

TEST_CASE("cross-validation of the two routes") {
    SECTION("zero measure: both empty") {
        auto s = make_discrete_string({}, {}, Interval{1.0});
        auto r = cross_validate(s, SearchRegion{-2.0, 2.0, 0.05, 3.0});
        CHECK(r.ok);
        CHECK(r.pairs == 0);
    }
    SECTION("random strings pair within 1e-8") {
        std::mt19937_64 rng(83);
        for (int trial = 0; trial < 25; ++trial) {
            auto s = test_util::random_string(rng, 4, 5.0);
            auto r = cross_validate(s, SearchRegion{-5.0, 5.0, 0.05, 5.0});
            CHECK(r.ok);
            CHECK(r.max_distance < 1e-8);
        }
    }
    SECTION("symmetric region finds mirrored partners") {
        auto s = make_discrete_string({0.2, 0.7}, {0.6, 0.4}, Interval{1.0});
        auto ev = spectrum_contour(s, SearchRegion{-5.0, 5.0, 0.05, 5.0});
        for (const auto& e : ev) {
            const Complex mirror = -std::conj(e.omega);
            double best = 1e9;
            for (const auto& f : ev) best = std::min(best, std::abs(f.omega - mirror));
            CHECK(best < 1e-8);
        }
    }
}
