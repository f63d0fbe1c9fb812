#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "krein/charfn.hpp"
#include "test_util.hpp"

using namespace krein;
using Catch::Approx;

namespace {
const Complex I(0.0, 1.0);
}

TEST_CASE("mode of the zero measure is constant 1") {
    auto s = make_discrete_string({}, {}, Interval{1.0});
    auto t = mode_at_vertices(s, Complex(2.0, -3.0));
    CHECK(t.end_value == Complex(1.0));
    CHECK(t.end_deriv == Complex(0.0));
    CHECK(mode_at(s, Complex(0.3, -0.7), 0.4) == Complex(1.0));
    CHECK(char_det(s, Complex(5.0, -1.0)).value == Complex(1.0));
}

TEST_CASE("one-term recursion by hand") {
    // one mass 1.0 at 0.5 on [0,1], z = 1 - i:
    // phi(1) = 1 - z^2 * 0.5 = 1 + i, and F(1 - i) = 0 (z is a root)
    auto s = make_discrete_string({0.5}, {1.0}, Interval{1.0});
    const Complex z(1.0, -1.0);
    auto t = mode_at_vertices(s, z);
    CHECK(std::abs(t.end_value - Complex(1.0, 1.0)) < 1e-15);
    CHECK(std::abs(char_det(s, z).value) < 1e-15);
    CHECK(std::abs(t.vertex_value[0] - 1.0) == 0.0);
    CHECK(t.deriv_left[0] == Complex(0.0));
}

TEST_CASE("mass at the right end") {
    // F(z) = 1 - i z m0, root at -i/m0
    auto s = make_discrete_string({1.0}, {1.0}, Interval{1.0});
    CHECK(std::abs(char_det(s, Complex(0.0, -1.0)).value) < 1e-15);
}

TEST_CASE("trajectory interpolation") {
    auto s = make_discrete_string({0.25, 0.6}, {0.7, 0.4}, Interval{1.0});
    const Complex z(1.5, -0.5);
    auto t = mode_at_vertices(s, z);
    SECTION("constant left of the support") {
        CHECK(mode_at(s, z, 0.1) == Complex(1.0));
        CHECK(mode_at(s, z, 0.25) == Complex(1.0));
    }
    SECTION("matches vertices") {
        for (std::size_t j = 0; j < s.size(); ++j)
            CHECK(std::abs(mode_at(s, z, s.position[j]) - t.vertex_value[j]) < 1e-15);
    }
    SECTION("linear decay case") {
        // one mass at 0 with z^2 = 1: phi(x) = 1 - x
        auto s1 = make_discrete_string({0.0}, {1.0}, Interval{1.0});
        CHECK(std::abs(mode_at(s1, Complex(1.0, 0.0), 1.0)) < 1e-15);
    }
    SECTION("out of range rejected") {
        CHECK_THROWS_AS(mode_at(s, z, -0.1), InvalidInput);
        CHECK_THROWS_AS(mode_at(s, z, 1.1), InvalidInput);
    }
}

TEST_CASE("jump relation at every atom") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        auto s = test_util::random_string(rng, 4, 5.0);
        const Complex z(u(rng), -std::abs(u(rng)) - 0.05);
        auto t = mode_at_vertices(s, z);
        for (std::size_t j = 0; j < s.size(); ++j) {
            const Complex jump = t.deriv_right[j] - t.deriv_left[j];
            const Complex expect = -z * z * t.vertex_value[j] * s.mass[j];
            CHECK(std::abs(jump - expect) <= 1e-13 * (1.0 + std::abs(expect)));
        }
    }
}

TEST_CASE("series evaluation") {
    SECTION("zero measure") {
        auto m = as_measure(make_discrete_string({}, {}, Interval{1.0}));
        CHECK(std::abs(char_det_series(m, Complex(3.0, -2.0), 1e-12).value - 1.0) < 1e-12);
    }
    SECTION("rejects nonpositive tolerance") {
        auto m = as_measure(make_discrete_string({0.5}, {1.0}, Interval{1.0}));
        CHECK_THROWS_AS(char_det_series(m, Complex(1.0, -1.0), 0.0), InvalidInput);
    }
    SECTION("layer roots of the closed-form spectrum") {
        // density 4 on [0,1]: roots at k*pi/2 - (i/4) ln 3
        auto m = as_measure(make_layered_density({{{0.0, 1.0, 4.0}}}, Interval{1.0}));
        for (int k = 0; k <= 1; ++k) {
            const Complex w(k * pi / 2.0, -std::log(3.0) / 4.0);
            CHECK(std::abs(char_det_series(m, w, 1e-10).value) < 1e-10);
        }
    }
    SECTION("agrees with the exact recursion on random strings") {
        std::mt19937_64 rng(23);
        std::uniform_real_distribution<double> u(-10.0, 10.0);
        for (int trial = 0; trial < 200; ++trial) {
            auto s = test_util::random_string(rng, 4, 5.0);
            const Complex z(u(rng), u(rng));
            const Complex exact = char_det(s, z).value;
            const Complex series = char_det_series(as_measure(s), z, 1e-11).value;
            CHECK(std::abs(series - exact) <= 1e-11 * (1.0 + std::abs(exact)));
        }
    }
    SECTION("vertex values match the series evaluation") {
        auto s = make_discrete_string({0.0, 0.5}, {0.4, 0.6}, Interval{1.0});
        const Complex z(2.0, -1.0);
        auto t = mode_at_vertices(s, z);
        for (std::size_t j = 0; j < s.size(); ++j) {
            const Complex via_series = phi_series_at(as_measure(s), z, s.position[j], 1e-13);
            CHECK(std::abs(via_series - t.vertex_value[j]) < 1e-12);
        }
    }
}

TEST_CASE("transfer evaluation matches series on mixed measures") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-4.0, 4.0), upos(0.0, 1.0), uc(0.0, 3.0);
    for (int trial = 0; trial < 60; ++trial) {
        auto atoms = test_util::random_string(rng, 2, 2.0);
        double b = upos(rng), e = upos(rng);
        if (b > e) std::swap(b, e);
        StringMeasure m = atoms.size() && e > b + 1e-3
                              ? make_measure(atoms, make_layered_density({{{b, e, uc(rng)}}},
                                                                         Interval{1.0}))
                              : as_measure(atoms);
        const Complex z(u(rng), u(rng));
        const Complex a = char_det_transfer(m, z).value;
        const Complex b2 = char_det_series(m, z, 1e-11).value;
        CHECK(std::abs(a - b2) <= 1e-10 * (1.0 + std::abs(a)));
    }
}

TEST_CASE("transfer derivative is the z-derivative") {
    auto m = make_measure(make_discrete_string({0.3}, {0.8}, Interval{1.0}),
                          make_layered_density({{{0.4, 0.9, 2.0}}}, Interval{1.0}));
    const Complex z(1.3, -0.6), h(1e-6, 0.0);
    const Complex fd =
        (char_det_transfer(m, z + h).value - char_det_transfer(m, z - h).value) / (2.0 * h);
    CHECK(std::abs(*char_det_transfer(m, z).derivative - fd) < 1e-7);
}

TEST_CASE("F(0) = 1 for every measure") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        auto s = test_util::random_string(rng, 4, 5.0);
        CHECK(char_det(s, Complex(0.0)).value == Complex(1.0));
        CHECK(char_det_transfer(as_measure(s), Complex(0.0)).value == Complex(1.0));
    }
}

TEST_CASE("Lagrange-identity sign and argument rotation") {
    std::mt19937_64 rng(53);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        auto s = test_util::random_string(rng, 4, 4.0);
        const Complex z(u(rng), -u(rng));  // quadrant IV, so z^2 in C_-
        auto t = mode_at_vertices(s, z);
        const double im_z2 = (z * z).imag();

        const double a_star = support_min(as_measure(s));
        double prev_arg = 0.0;
        Complex prev_val = 1.0;
        bool first = true;
        for (int k = 0; k <= 400; ++k) {
            const double x = a_star + (s.length - a_star) * (k + 1) / 401.0;
            const Complex val = t.value_at(x);
            // phi does not vanish right of the support start
            REQUIRE(std::abs(val) > 0.0);
            if (!first) {
                const double darg = std::arg(val / prev_val);
                CHECK(darg > 0.0);  // strictly increasing branch of arg
            }
            prev_arg += first ? 0.0 : std::arg(val / prev_val);
            prev_val = val;
            first = false;
        }
        for (std::size_t j = 0; j < s.size(); ++j) {
            // Im z^2 * Im(conj(phi) dphi) < 0 on (a*, length]
            if (s.position[j] <= a_star) continue;
            const double lhs =
                im_z2 * (std::conj(t.vertex_value[j]) * t.deriv_left[j]).imag();
            CHECK(lhs < 0.0);
        }
        const double end_sign =
            im_z2 * (std::conj(t.end_value) * t.end_deriv).imag();
        if (!s.empty()) CHECK(end_sign < 0.0);
    }
}

TEST_CASE("dF/dz") {
    SECTION("closed form at a simple root, Newton reconverges") {
        auto s = make_discrete_string({1.0}, {1.0}, Interval{1.0});
        const Complex root(0.0, -1.0);
        const Complex d = char_det_dz(s, root);
        CHECK(std::abs(d) > 0.1);
        // central finite difference of F
        const Complex h(1e-6, 0.0);
        const Complex fd = (char_det(s, root + h).value - char_det(s, root - h).value) / (2.0 * h);
        CHECK(std::abs(d - fd) <= 1e-6 * std::abs(fd));
        Complex z = root + 0.01 * Complex(1.0, 1.0);
        for (int it = 0; it < 5; ++it) z -= char_det(s, z).value / char_det_dz(s, z);
        CHECK(std::abs(z - root) < 1e-12);
    }
    SECTION("vanishes at the double root") {
        auto s = make_discrete_string({0.0}, {4.0}, Interval{1.0});
        CHECK(std::abs(char_det_dz(s, Complex(0.0, -0.5))) < 1e-10);
    }
    SECTION("nonzero at simple roots") {
        auto s = make_discrete_string({0.5}, {1.0}, Interval{1.0});
        CHECK(std::abs(char_det_dz(s, Complex(1.0, -1.0))) > 1e-3);
    }
    SECTION("closed form requested off-root throws") {
        auto s = make_discrete_string({0.5}, {1.0}, Interval{1.0});
        CHECK_THROWS_AS(char_det_dz(s, Complex(0.5, -0.5), 1e-12, true), NotARoot);
    }
}

TEST_CASE("dF/dM") {
    auto base = make_discrete_string({0.5}, {1.0}, Interval{1.0});
    const Complex root(1.0, -1.0);
    SECTION("zero direction gives zero") {
        auto dir = as_measure(make_discrete_string({}, {}, Interval{1.0}));
        CHECK(std::abs(char_det_dmeasure(base, root, dir)) == 0.0);
    }
    SECTION("atom left of the support start sees phi = 1") {
        auto dir = as_measure(make_discrete_string({0.25}, {1.0}, Interval{1.0}));
        const Complex expect = -I * root / mode_at_vertices(base, root).end_value;
        CHECK(std::abs(char_det_dmeasure(base, root, dir) - expect) < 1e-12);
    }
    SECTION("off-root rejected") {
        auto dir = as_measure(make_discrete_string({0.25}, {1.0}, Interval{1.0}));
        CHECK_THROWS_AS(char_det_dmeasure(base, Complex(0.3, -0.3), dir), NotARoot);
    }
    SECTION("agrees with tracked root motion") {
        auto dir = as_measure(make_discrete_string({0.25}, {1.0}, Interval{1.0}));
        const Complex danalytic =
            -char_det_dmeasure(base, root, dir) / char_det_dz(base, root);
        const Complex fd = test_util::tracked_derivative(as_measure(base), dir, root, 1e-6);
        CHECK(std::abs(danalytic - fd) <= 1e-6 * (1.0 + std::abs(fd)));
    }
}
