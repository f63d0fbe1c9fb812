#pragma once

#include <vector>

#include "krein/charfn.hpp"
#include "krein/common.hpp"
#include "krein/measure.hpp"
#include "krein/spectra.hpp"

namespace krein {

// One eigenvalue-perturbation record: a simple root carries the directional
// derivative (order 1); a multiple root carries the leading Puiseux
// coefficient of the zeta^(1/r) splitting.
struct PerturbationResult {
    Complex omega;
    Complex value;
    int order = 1;
};

namespace detail {

inline void require_root(const DiscreteString& s, Complex omega) {
    if (std::abs(char_det(s, omega).value) > root_tolerance(omega))
        throw NotARoot("omega is not a quasi-eigenvalue of the string");
}

// r-th derivative of the characteristic polynomial at z, plus the magnitude
// scale of its terms (for vanishing tests).
inline Complex char_poly_derivative(const std::vector<Complex>& poly, Complex z, int order,
                                    double& scale) {
    Complex acc = 0.0;
    scale = 0.0;
    const double az = std::abs(z);
    double pw = 1.0;
    std::vector<double> abs_pw(poly.size(), 0.0);
    for (std::size_t k = 0; k < poly.size(); ++k) {
        abs_pw[k] = pw;
        pw *= az;
    }
    for (std::size_t k = poly.size(); k-- > static_cast<std::size_t>(order);) {
        double f = 1.0;
        for (int r = 0; r < order; ++r) f *= static_cast<double>(k - r);
        acc = acc * z + f * poly[k];
        scale += f * std::abs(poly[k]) * abs_pw[k - order];
    }
    return acc;
}

}  // namespace detail

// phi^2(l) - 2 i w int phi^2 dM: vanishes exactly when the quasi-eigenvalue
// is non-simple (it equals -w phi(l) dF/dz).
inline Complex degeneracy_indicator(const DiscreteString& s, Complex omega) {
    detail::require_root(s, omega);
    const Complex phi_end = mode_at_vertices(s, omega).end_value;
    return phi_end * phi_end -
           2.0 * Complex(0.0, 1.0) * omega * mode_sq_mass_integral(s, omega);
}

// Directional derivative of the simple quasi-eigenvalue along dV:
//   Omega'(dV) = -w^2 int phi^2 dV / (2 w int phi^2 dM + i phi^2(l)).
inline Complex simple_eig_derivative(const DiscreteString& s, Complex omega,
                                     const StringMeasure& direction) {
    detail::require_root(s, omega);
    const Complex phi_end = mode_at_vertices(s, omega).end_value;
    const Complex q_self = mode_sq_mass_integral(s, omega);
    const Complex den = 2.0 * omega * q_self + Complex(0.0, 1.0) * phi_end * phi_end;
    const double den_scale =
        2.0 * std::abs(omega) * std::abs(q_self) + std::abs(phi_end) * std::abs(phi_end);
    if (std::abs(den) < 1e-8 * std::max(den_scale, 1e-300))
        throw DegenerateEigenvalue("eigenvalue is non-simple: no analytic derivative");
    return -omega * omega * mode_sq_direction_integral(s, omega, direction) / den;
}

// The r values of the leading Puiseux coefficient for a root of multiplicity
// r >= 2 under the perturbation dM + zeta dV:
//   c1^r = i r! w int phi^2 dV / (phi(l) d^r F/dz^r).
inline std::vector<Complex> puiseux_leading(const DiscreteString& s, Complex omega,
                                            const StringMeasure& direction, int r) {
    if (r < 2) throw InvalidInput("puiseux_leading requires multiplicity r >= 2");
    detail::require_root(s, omega);
    const std::vector<Complex> poly = char_poly(s);
    for (int j = 1; j < r; ++j) {
        double scale = 0.0;
        const Complex dj = detail::char_poly_derivative(poly, omega, j, scale);
        if (std::abs(dj) > 1e-6 * std::max(scale, 1e-300))
            throw InvalidInput("root multiplicity is smaller than the requested order");
    }
    double scale_r = 0.0;
    const Complex dr = detail::char_poly_derivative(poly, omega, r, scale_r);
    if (std::abs(dr) < 1e-8 * std::max(scale_r, 1e-300))
        throw InvalidInput("root multiplicity exceeds the requested order");

    const Complex q_dir = mode_sq_direction_integral(s, omega, direction);
    const Complex phi_end = mode_at_vertices(s, omega).end_value;
    if (std::abs(q_dir) < 1e-12 * (1.0 + std::abs(phi_end)))
        throw InvalidDirection("direction integrates to zero against the squared mode");

    double rfact = 1.0;
    for (int j = 2; j <= r; ++j) rfact *= j;
    const Complex c1r = Complex(0.0, 1.0) * rfact * omega * q_dir / (phi_end * dr);
    const Complex principal = root0(c1r, r);
    std::vector<Complex> out;
    out.reserve(r);
    for (int k = 0; k < r; ++k)
        out.push_back(principal * std::polar(1.0, 2.0 * pi * k / r));
    return out;
}

// Dispatch on the multiplicity at omega.
inline PerturbationResult analyze_perturbation(const DiscreteString& s, Complex omega,
                                               const StringMeasure& direction) {
    const Complex indicator = degeneracy_indicator(s, omega);
    const Complex phi_end = mode_at_vertices(s, omega).end_value;
    const double ind_scale = std::abs(phi_end) * std::abs(phi_end) +
                             2.0 * std::abs(omega) * std::abs(mode_sq_mass_integral(s, omega));
    if (std::abs(indicator) > 1e-8 * std::max(ind_scale, 1e-300))
        return PerturbationResult{omega, simple_eig_derivative(s, omega, direction), 1};
    // assume a double root unless the second derivative also vanishes
    const std::vector<Complex> poly = char_poly(s);
    int r = 2;
    for (; r < 8; ++r) {
        double scale = 0.0;
        const Complex dr = detail::char_poly_derivative(poly, omega, r, scale);
        if (std::abs(dr) > 1e-6 * std::max(scale, 1e-300)) break;
    }
    return PerturbationResult{omega, puiseux_leading(s, omega, direction, r).front(), r};
}

}  // namespace krein
