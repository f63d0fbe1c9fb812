#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <vector>

#include "krein/common.hpp"

namespace krein::detail {

inline Complex horner(const std::vector<Complex>& coeff, Complex z) {
    Complex v = 0.0;
    for (std::size_t k = coeff.size(); k-- > 0;) v = v * z + coeff[k];
    return v;
}

inline std::vector<Complex> poly_derivative(const std::vector<Complex>& coeff, int order = 1) {
    std::vector<Complex> d = coeff;
    for (int r = 0; r < order; ++r) {
        if (d.size() <= 1) return {Complex(0.0)};
        std::vector<Complex> next(d.size() - 1);
        for (std::size_t k = 1; k < d.size(); ++k) next[k - 1] = static_cast<double>(k) * d[k];
        d = std::move(next);
    }
    return d;
}

// All roots of a polynomial given by ascending complex coefficients, via the
// companion matrix, with a few Newton polish steps per root.
inline std::vector<Complex> polynomial_roots(std::vector<Complex> coeff) {
    // strip trailing zeros (degree detection)
    double scale = 0.0;
    for (const Complex& c : coeff) scale = std::max(scale, std::abs(c));
    if (scale == 0.0) return {};
    while (coeff.size() > 1 && std::abs(coeff.back()) < 1e-14 * scale) coeff.pop_back();
    const std::size_t deg = coeff.size() - 1;
    if (deg == 0) return {};

    std::vector<Complex> roots;
    if (deg == 1) {
        roots.push_back(-coeff[0] / coeff[1]);
    } else {
        Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(deg),
                                                       static_cast<Eigen::Index>(deg));
        for (std::size_t k = 0; k + 1 < deg; ++k) comp(static_cast<Eigen::Index>(k + 1),
                                                       static_cast<Eigen::Index>(k)) = 1.0;
        for (std::size_t k = 0; k < deg; ++k)
            comp(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(deg - 1)) =
                -coeff[k] / coeff[deg];
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, false);
        for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k)
            roots.push_back(solver.eigenvalues()[k]);
    }

    const std::vector<Complex> dcoeff = poly_derivative(coeff);
    for (Complex& r : roots) {
        for (int it = 0; it < 4; ++it) {
            const Complex p = horner(coeff, r);
            const Complex dp = horner(dcoeff, r);
            if (std::abs(dp) == 0.0) break;
            const Complex step = p / dp;
            if (!finite(step)) break;
            if (std::abs(horner(coeff, r - step)) <= std::abs(p)) r -= step;
            else break;
        }
    }
    return roots;
}

}  // namespace krein::detail
