#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace krein {

using Complex = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input fails a precondition (bad geometry, negative mass, NaN, ...).
struct InvalidInput : Error {
    using Error::Error;
};

// A formula valid only at quasi-eigenvalues was requested off a root.
struct NotARoot : Error {
    using Error::Error;
};

// Closed-form derivative requested where the implicit function theorem fails.
struct DegenerateEigenvalue : Error {
    using Error::Error;
};

// Perturbation direction integrates to ~0 against the squared mode.
struct InvalidDirection : Error {
    using Error::Error;
};

// The branch cut of the square root was hit exactly.
struct BranchCutHit : Error {
    using Error::Error;
};

// Winding-number quadrature failed to resolve an integer count.
struct QuadratureFailure : Error {
    using Error::Error;
};

// R^2 scalar product of two complex numbers.
inline double dot(Complex a, Complex b) {
    return a.real() * b.real() + a.imag() * b.imag();
}

// Branch of arg continuous off the negative real axis, arg0(x) = -pi for x < 0.
inline double arg0(Complex z) {
    if (z.imag() == 0.0 && z.real() < 0.0) return -pi;
    return std::arg(z);
}

// Square root continuous off the negative real axis, sqrt0(1) = 1,
// sqrt0(x) = -i sqrt(|x|) for x < 0 (consistent with arg0).
inline Complex sqrt0(Complex z) {
    if (z.imag() == 0.0 && z.real() < 0.0)
        return Complex(0.0, -std::sqrt(-z.real()));
    return std::sqrt(z);
}

// Principal r-th root with the arg0 branch; the full set is this value
// times the r-th roots of unity.
inline Complex root0(Complex z, int r) {
    if (z == 0.0) return 0.0;
    double rad = std::pow(std::abs(z), 1.0 / r);
    double ang = arg0(z) / r;
    return std::polar(rad, ang);
}

inline bool finite(double x) { return std::isfinite(x); }
inline bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Smallest strictly positive root of a t^2 + 2 b t + c = 0, or nan.
// Degenerate (tangential) double roots and roots below t_min are rejected.
inline double smallest_positive_quadratic_root(double a, double b, double c, double t_min) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    double best = nan;
    auto consider = [&](double t) {
        if (std::isfinite(t) && t > t_min && (!(best == best) || t < best)) best = t;
    };
    if (a == 0.0) {
        if (b != 0.0) consider(-c / (2.0 * b));
        return best;
    }
    double disc = b * b - a * c;
    if (disc <= 0.0) return nan;  // no crossing, or tangency
    double s = std::sqrt(disc);
    double q = -(b + (b >= 0.0 ? s : -s));
    consider(q / a);
    if (q != 0.0) consider(c / q);
    return best;
}

}  // namespace krein
