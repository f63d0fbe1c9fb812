#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "krein/common.hpp"
#include "krein/measure.hpp"
#include "krein/piecewise_poly.hpp"

namespace krein {

// Fundamental solution phi(., z) of a discrete string, sampled at the mass
// positions. Between masses the solution is affine in x; at each mass the
// x-derivative jumps by -z^2 * phi * mass.
struct ModeTrajectory {
    Complex z;
    std::vector<double> vertex_x;
    std::vector<Complex> vertex_value;
    std::vector<Complex> deriv_left;   // d/dx from the left at each vertex
    std::vector<Complex> deriv_right;  // d/dx from the right at each vertex
    Complex end_value;                 // phi(length)
    Complex end_deriv;                 // d/dx from the right at x = length
    double length = 1.0;

    // Affine interpolation between vertices; constant 1 left of the support.
    Complex value_at(double x) const {
        if (x < 0.0 || x > length) throw InvalidInput("evaluation point outside [0, length]");
        if (vertex_x.empty() || x <= vertex_x.front()) return 1.0;
        std::size_t j = 0;
        while (j + 1 < vertex_x.size() && x > vertex_x[j + 1]) ++j;
        if (j + 1 < vertex_x.size() && x == vertex_x[j + 1]) return vertex_value[j + 1];
        return vertex_value[j] + (x - vertex_x[j]) * deriv_right[j];
    }
};

struct CharValue {
    Complex value;
    Complex z;
    std::optional<Complex> derivative;
    // magnitude of the summed terms; eps * scale is the rounding floor of value
    double scale = 1.0;
};

// Forward recursion for phi at the mass positions:
//   phi(a_k) = 1 - z^2 sum_{i<k} (a_k - a_i) phi(a_i) mu_i.
inline ModeTrajectory mode_at_vertices(const DiscreteString& s, Complex z) {
    ModeTrajectory t;
    t.z = z;
    t.length = s.length;
    const Complex z2 = z * z;
    Complex s0 = 0.0;  // sum phi(a_i) mu_i
    Complex s1 = 0.0;  // sum a_i phi(a_i) mu_i
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double a = s.position[k];
        const Complex val = 1.0 - z2 * (a * s0 - s1);
        t.vertex_x.push_back(a);
        t.vertex_value.push_back(val);
        t.deriv_left.push_back(-z2 * s0);
        s0 += val * s.mass[k];
        s1 += a * val * s.mass[k];
        t.deriv_right.push_back(-z2 * s0);
    }
    t.end_value = 1.0 - z2 * (s.length * s0 - s1);
    t.end_deriv = -z2 * s0;
    return t;
}

inline Complex mode_at(const DiscreteString& s, Complex z, double x) {
    return mode_at_vertices(s, z).value_at(x);
}

// Characteristic determinant F(z) = phi(length) - i z * sum phi(a_j) mu_j.
// Zeros in C \ {0} are the quasi-eigenvalues; F(0) = 1 for every measure.
inline CharValue char_det(const DiscreteString& s, Complex z) {
    const Complex z2 = z * z;
    Complex s0 = 0.0, s1 = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double a = s.position[k];
        const Complex val = 1.0 - z2 * (a * s0 - s1);
        s0 += val * s.mass[k];
        s1 += a * val * s.mass[k];
    }
    const Complex phi_end = 1.0 - z2 * (s.length * s0 - s1);
    return CharValue{phi_end - Complex(0.0, 1.0) * z * s0, z, std::nullopt,
                     std::abs(phi_end) + std::abs(z * s0)};
}

// ---------------------------------------------------------------------------
// Maclaurin series of phi and F in z.
//
// phi(x, z) = sum_j (-1)^j phi_j(x) z^(2j) with phi_0 = 1 and
// phi_j(x) = int_[0,x) (x - s) phi_{j-1}(s) dM(s). The moment functions are
// kept as piecewise polynomials so atoms and constant layers integrate in
// closed form; no quadrature enters.
// ---------------------------------------------------------------------------

class CharSeries {
public:
    CharSeries(const StringMeasure& m, int terms) : length_(m.length()), norm_(total_mass(m)) {
        build(m, terms);
    }

    double length() const { return length_; }
    double measure_norm() const { return norm_; }
    int terms() const { return static_cast<int>(phi_end_.size()); }

    // Smallest truncation index J >= 8 whose factorial tail bound
    //   sum_{j>J} (2 L |dM|)^j |z|^(2j) (1 + |z||dM|) / (2j)!
    // is below tol with a safety factor of 10.
    static int terms_needed(double length, double norm, double abs_z, double tol) {
        const double q = 2.0 * length * norm * abs_z * abs_z;
        const double pref = 1.0 + abs_z * norm;
        double term = pref;  // j = 0
        int j = 0;
        const double target = tol / 10.0;
        while (true) {
            ++j;
            term *= q / ((2.0 * j - 1.0) * (2.0 * j));
            const double ratio = q / ((2.0 * j + 1.0) * (2.0 * j + 2.0));
            if (j >= 8 && ratio < 0.5 && term / (1.0 - ratio) < target) return j;
            if (j > 4000) return j;  // unreachable for finite inputs
        }
    }

    Complex phi_end_value(Complex z) const {
        Complex acc = 0.0, z2 = z * z, pw = 1.0;
        for (std::size_t j = 0; j < phi_end_.size(); ++j) {
            acc += sign(j) * phi_end_[j] * pw;
            pw *= z2;
        }
        return acc;
    }

    Complex value(Complex z) const {
        Complex acc = 0.0, z2 = z * z, pw = 1.0;
        const Complex iz = Complex(0.0, 1.0) * z;
        for (std::size_t j = 0; j < phi_end_.size(); ++j) {
            acc += sign(j) * (phi_end_[j] - iz * moment_[j]) * pw;
            pw *= z2;
        }
        return acc;
    }

    // Termwise r-th derivative of the series.
    Complex derivative(Complex z, int order = 1) const {
        std::vector<Complex> c = coefficients();
        Complex acc = 0.0;
        for (std::size_t k = c.size(); k-- > static_cast<std::size_t>(order);) {
            double f = 1.0;
            for (int r = 0; r < order; ++r) f *= static_cast<double>(k - r);
            acc = acc * z + f * c[k];
        }
        return acc;
    }

    // Ascending coefficients of F as a series in z (odd terms imaginary).
    std::vector<Complex> coefficients() const {
        std::vector<Complex> c(2 * phi_end_.size() + 1, 0.0);
        for (std::size_t j = 0; j < phi_end_.size(); ++j) {
            c[2 * j] += sign(j) * phi_end_[j];
            c[2 * j + 1] += -Complex(0.0, 1.0) * sign(j) * moment_[j];
        }
        return c;
    }

    // phi(x, z) from the stored moment polynomials.
    Complex phi_at(double x, Complex z) const {
        Complex acc = 0.0, z2 = z * z, pw = 1.0;
        for (std::size_t j = 0; j < terms_x_.size(); ++j) {
            acc += sign(j) * terms_x_[j].eval(x) * pw;
            pw *= z2;
        }
        return acc;
    }

private:
    static double sign(std::size_t j) { return (j % 2 == 0) ? 1.0 : -1.0; }

    void build(const StringMeasure& m, int terms) {
        // knots: interval ends, atom positions, layer breakpoints
        std::vector<double> knots{0.0, length_};
        knots.insert(knots.end(), m.atoms.position.begin(), m.atoms.position.end());
        knots.insert(knots.end(), m.density.breakpoint.begin(), m.density.breakpoint.end());
        std::sort(knots.begin(), knots.end());
        knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
        const std::size_t ncell = knots.size() - 1;

        std::vector<double> cell_c(ncell, 0.0);
        for (std::size_t q = 0; q < ncell; ++q) {
            const double mid = 0.5 * (knots[q] + knots[q + 1]);
            for (std::size_t k = 0; k < m.density.cells(); ++k)
                if (mid > m.density.breakpoint[k] && mid < m.density.breakpoint[k + 1])
                    cell_c[q] = m.density.value[k];
        }
        // atoms indexed by the knot they sit on
        std::vector<double> atom_at_knot(knots.size(), 0.0);
        for (std::size_t i = 0; i < m.atoms.size(); ++i) {
            const auto it = std::lower_bound(knots.begin(), knots.end(), m.atoms.position[i]);
            atom_at_knot[static_cast<std::size_t>(it - knots.begin())] += m.atoms.mass[i];
        }

        detail::PiecewisePoly prev = detail::PiecewisePoly::constant(knots, 1.0);
        auto eval_at_knot = [&](const detail::PiecewisePoly& p, std::size_t ki) {
            if (ki + 1 < knots.size()) return p.eval_local(ki, 0.0);
            return p.eval_local(ki - 1, knots[ki] - knots[ki - 1]);
        };

        for (int j = 0; j <= terms; ++j) {
            phi_end_.push_back(eval_at_knot(prev, knots.size() - 1));
            double mom = 0.0;
            for (std::size_t ki = 0; ki < knots.size(); ++ki)
                if (atom_at_knot[ki] != 0.0) mom += atom_at_knot[ki] * eval_at_knot(prev, ki);
            for (std::size_t q = 0; q < ncell; ++q)
                if (cell_c[q] != 0.0)
                    mom += cell_c[q] * prev.cell_moment(q, 0, knots[q + 1] - knots[q]);
            moment_.push_back(mom);
            terms_x_.push_back(prev);
            if (j == terms) break;
            // discrete strings terminate: phi_j = 0 once j exceeds the atom count
            bool all_zero = phi_end_.back() == 0.0 && mom == 0.0;
            for (std::size_t q = 0; all_zero && q < ncell; ++q)
                for (double c : prev.coeff[q])
                    if (c != 0.0) { all_zero = false; break; }
            if (all_zero) break;

            // next moment function
            detail::PiecewisePoly next;
            next.knot = knots;
            next.coeff.resize(ncell);
            double r1 = 0.0, r0 = 0.0;  // completed contributions: x*r1 - r0
            for (std::size_t q = 0; q < ncell; ++q) {
                if (atom_at_knot[q] != 0.0) {
                    const double w = atom_at_knot[q] * eval_at_knot(prev, q);
                    r1 += w;
                    r0 += w * knots[q];
                }
                const auto& pc = prev.coeff[q];
                std::vector<double> out(pc.size() + 2, 0.0);
                out[0] = knots[q] * r1 - r0;
                out[1] = r1;
                if (cell_c[q] != 0.0)
                    for (std::size_t k = 0; k < pc.size(); ++k)
                        out[k + 2] += cell_c[q] * pc[k] /
                                      (static_cast<double>(k + 1) * static_cast<double>(k + 2));
                next.coeff[q] = std::move(out);
                if (cell_c[q] != 0.0) {
                    const double width = knots[q + 1] - knots[q];
                    const double i0 = prev.cell_moment(q, 0, width);
                    const double i1 = prev.cell_moment(q, 1, width);
                    r1 += cell_c[q] * i0;
                    r0 += cell_c[q] * (knots[q] * i0 + i1);
                }
            }
            prev = std::move(next);
        }
    }

    double length_;
    double norm_;
    std::vector<double> phi_end_;
    std::vector<double> moment_;
    std::vector<detail::PiecewisePoly> terms_x_;
};

// F(z) by the truncated Maclaurin series; the truncation index comes from the
// factorial tail bound, so the result is within tol*(1+|F|) of exact.
inline CharValue char_det_series(const StringMeasure& m, Complex z, double tol) {
    if (!(tol > 0.0)) throw InvalidInput("tolerance must be positive");
    const int terms = CharSeries::terms_needed(m.length(), total_mass(m), std::abs(z), tol);
    CharSeries series(m, terms);
    const double abs_z = std::abs(z);
    double scale = 0.0, pw = 1.0;
    for (const Complex& c : series.coefficients()) {
        scale += std::abs(c) * pw;
        pw *= abs_z;
    }
    return CharValue{series.value(z), z, series.derivative(z, 1), scale};
}

inline Complex phi_series_at(const StringMeasure& m, Complex z, double x, double tol) {
    if (!(tol > 0.0)) throw InvalidInput("tolerance must be positive");
    if (x < 0.0 || x > m.length()) throw InvalidInput("evaluation point outside [0, length]");
    const int terms = CharSeries::terms_needed(m.length(), total_mass(m), std::abs(z), tol);
    return CharSeries(m, terms).phi_at(x, z);
}

// ---------------------------------------------------------------------------
// Exact per-layer propagation of (phi, phi') and their z-derivatives.
// Layers use cos / sinc of w = z^2 c dx^2, which are entire in w, so the
// c -> 0 and z -> 0 limits need no special casing beyond small-|w| series.
// ---------------------------------------------------------------------------

namespace detail {

inline Complex cosw(Complex w) {  // cos(sqrt(w))
    if (std::abs(w) < 1e-2) {
        Complex acc = 1.0, term = 1.0;
        for (int k = 1; k <= 10; ++k) {
            term *= -w / (2.0 * k * (2.0 * k - 1.0));
            acc += term;
            if (std::abs(term) < 1e-20) break;
        }
        return acc;
    }
    const Complex s = std::sqrt(w);
    return std::cos(s);
}

inline Complex sincw(Complex w) {  // sin(sqrt(w))/sqrt(w)
    if (std::abs(w) < 1e-2) {
        Complex acc = 1.0, term = 1.0;
        for (int k = 1; k <= 10; ++k) {
            term *= -w / (2.0 * k * (2.0 * k + 1.0));
            acc += term;
            if (std::abs(term) < 1e-20) break;
        }
        return acc;
    }
    const Complex s = std::sqrt(w);
    return std::sin(s) / s;
}

inline Complex vw(Complex w) {  // (1 - cos(sqrt(w)))/w
    if (std::abs(w) < 1e-2) {
        Complex acc = 0.5, term = 0.5;
        for (int k = 1; k <= 10; ++k) {
            term *= -w / ((2.0 * k + 1.0) * (2.0 * k + 2.0));
            acc += term;
            if (std::abs(term) < 1e-20) break;
        }
        return acc;
    }
    return (1.0 - cosw(w)) / w;
}

inline Complex sincw_prime(Complex w) {  // d/dw sincw
    if (std::abs(w) < 1e-2) {
        // -1/6 + w/60 - w^2/1680 + ...
        Complex acc = 0.0, pw = 1.0;
        double num = -1.0;
        double fact = 6.0;  // (2k+1)! for k=1
        for (int k = 1; k <= 10; ++k) {
            acc += num * static_cast<double>(k) / fact * pw;
            pw *= w;
            num = -num;
            fact *= (2.0 * k + 2.0) * (2.0 * k + 3.0);
        }
        return acc;
    }
    return (cosw(w) - sincw(w)) / (2.0 * w);
}

inline Complex vw_prime(Complex w) {  // d/dw vw
    if (std::abs(w) < 1e-2) {
        Complex acc = 0.0;
        double num = -1.0;
        double fact = 24.0;  // (2k+2)! for k=1
        Complex pw = 1.0;
        for (int k = 1; k <= 10; ++k) {
            acc += num * static_cast<double>(k) / fact * pw;
            pw *= w;
            num = -num;
            fact *= (2.0 * k + 3.0) * (2.0 * k + 4.0);
        }
        return acc;
    }
    return (sincw(w) / 2.0 * w - (1.0 - cosw(w))) / (w * w);
}

inline Complex gw(Complex w) {  // (1 - sincw(4w)) / (2w); int sin^2(ku)/k^2 = dx^3 gw
    if (std::abs(w) < 1e-2) {
        // 1/3 - w/15 + 2w^2/315 - w^3/2835 + ...
        Complex acc = 0.0;
        double num = 1.0;
        double fact = 6.0;  // (2k+1)! for k=1
        double four = 4.0;
        Complex pw = 1.0;
        for (int k = 1; k <= 10; ++k) {
            acc += num * four / (2.0 * fact) * pw;
            pw *= w;
            num = -num;
            four *= 4.0;
            fact *= (2.0 * k + 2.0) * (2.0 * k + 3.0);
        }
        return acc;
    }
    return (1.0 - sincw(4.0 * w)) / (2.0 * w);
}

struct TransferState {
    Complex y = 1.0, dy = 0.0;      // phi, d/dx phi
    Complex yz = 0.0, dyz = 0.0;    // z-derivatives of the above
    Complex mi = 0.0, miz = 0.0;    // int phi dM and its z-derivative

    void cross_mass(Complex z, Complex value_mass) {
        mi += y * value_mass;
        miz += yz * value_mass;
        dyz += (-2.0 * z * y - z * z * yz) * value_mass;
        dy += -z * z * y * value_mass;
    }

    void cross_layer(Complex z, double c, double dx) {
        const Complex z2 = z * z;
        const Complex w = z2 * c * (dx * dx);
        const Complex wz = 2.0 * z * c * (dx * dx);
        const Complex C = cosw(w), S = sincw(w), V = vw(w);
        const Complex Cz = -0.5 * S * wz, Sz = sincw_prime(w) * wz, Vz = vw_prime(w) * wz;

        const Complex y1 = y * C + dy * dx * S;
        const Complex dy1 = -z2 * c * dx * S * y + dy * C;
        const Complex y1z = yz * C + y * Cz + dyz * dx * S + dy * dx * Sz;
        const Complex dy1z = -(2.0 * z * c * dx * S + z2 * c * dx * Sz) * y - z2 * c * dx * S * yz +
                             dyz * C + dy * Cz;
        if (c != 0.0) {
            mi += c * (y * dx * S + dy * dx * dx * V);
            miz += c * (yz * dx * S + y * dx * Sz + dyz * dx * dx * V + dy * dx * dx * Vz);
        }
        y = y1;
        dy = dy1;
        yz = y1z;
        dyz = dy1z;
    }
};

// Shared event walk over atoms and layer cells, left to right.
template <typename OnMass, typename OnLayer>
inline void walk_measure(const StringMeasure& m, OnMass&& on_mass, OnLayer&& on_layer) {
    std::vector<double> knots{0.0, m.length()};
    knots.insert(knots.end(), m.atoms.position.begin(), m.atoms.position.end());
    knots.insert(knots.end(), m.density.breakpoint.begin(), m.density.breakpoint.end());
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    auto density_at = [&](double x) {
        for (std::size_t k = 0; k < m.density.cells(); ++k)
            if (x < m.density.breakpoint[k + 1]) return m.density.value[k];
        return 0.0;
    };
    std::size_t atom = 0;
    for (std::size_t q = 0; q + 1 <= knots.size(); ++q) {
        while (atom < m.atoms.size() && m.atoms.position[atom] == knots[q])
            on_mass(m.atoms.mass[atom++]);
        if (q + 1 == knots.size()) break;
        on_layer(density_at(0.5 * (knots[q] + knots[q + 1])), knots[q + 1] - knots[q]);
    }
}

}  // namespace detail

// F(z) and dF/dz by exact layer propagation; preferred inside root solvers.
inline CharValue char_det_transfer(const StringMeasure& m, Complex z) {
    detail::TransferState st;
    detail::walk_measure(
        m, [&](double mass) { st.cross_mass(z, mass); },
        [&](double c, double dx) { st.cross_layer(z, c, dx); });
    const Complex i(0.0, 1.0);
    return CharValue{st.y - i * z * st.mi, z, st.yz - i * st.mi - i * z * st.miz,
                     std::abs(st.y) + std::abs(z * st.mi)};
}

// int phi^2 dM over the measure itself (used by the derivative formulas).
inline Complex mode_sq_mass_integral(const StringMeasure& m, Complex z) {
    Complex y = 1.0, dy = 0.0, acc = 0.0;
    const Complex z2 = z * z;
    detail::walk_measure(
        m,
        [&](double mass) {
            acc += y * y * mass;
            dy += -z2 * y * mass;
        },
        [&](double c, double dx) {
            const Complex w = z2 * c * (dx * dx);
            const Complex C = detail::cosw(w), S = detail::sincw(w);
            if (c != 0.0) {
                const Complex S4 = detail::sincw(4.0 * w), V4 = detail::vw(4.0 * w);
                const Complex G = detail::gw(w);
                acc += c * (y * y * 0.5 * dx * (1.0 + S4) + 2.0 * y * dy * dx * dx * V4 +
                            dy * dy * dx * dx * dx * G);
            }
            const Complex y1 = y * C + dy * dx * S;
            const Complex dy1 = -z2 * c * dx * S * y + dy * C;
            y = y1;
            dy = dy1;
        });
    return acc;
}

inline Complex mode_sq_mass_integral(const DiscreteString& s, Complex z) {
    const ModeTrajectory t = mode_at_vertices(s, z);
    Complex acc = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j)
        acc += t.vertex_value[j] * t.vertex_value[j] * s.mass[j];
    return acc;
}

// int phi(., z; base)^2 dV over a direction measure (atoms and layers).
inline Complex mode_sq_direction_integral(const DiscreteString& base, Complex z,
                                          const StringMeasure& direction) {
    const ModeTrajectory t = mode_at_vertices(base, z);
    Complex acc = 0.0;
    for (std::size_t i = 0; i < direction.atoms.size(); ++i) {
        const Complex v = t.value_at(direction.atoms.position[i]);
        acc += v * v * direction.atoms.mass[i];
    }
    for (std::size_t k = 0; k < direction.density.cells(); ++k) {
        const double c = direction.density.value[k];
        if (c == 0.0) continue;
        double lo = direction.density.breakpoint[k];
        const double hi = direction.density.breakpoint[k + 1];
        // integrate the squared affine mode piece by piece
        while (lo < hi) {
            double cut = hi;
            for (double a : t.vertex_x)
                if (a > lo && a < cut) cut = a;
            const Complex v0 = t.value_at(lo);
            Complex slope = 0.0;
            if (!t.vertex_x.empty() && lo >= t.vertex_x.front()) {
                std::size_t j = 0;
                while (j + 1 < t.vertex_x.size() && lo >= t.vertex_x[j + 1]) ++j;
                slope = t.deriv_right[j];
            }
            const double u = cut - lo;
            acc += c * (v0 * v0 * u + v0 * slope * u * u + slope * slope * u * u * u / 3.0);
            lo = cut;
        }
    }
    return acc;
}

inline double root_tolerance(Complex z) { return 1e-10 * std::max(1.0, std::abs(z)); }

// dF/dz. At quasi-eigenvalues the closed form
//   phi(l)/z - (2i/phi(l)) int phi^2 dM
// is used; elsewhere the termwise series derivative. The closed form is
// validated against finite differences of F in the test suite.
inline Complex char_det_dz(const StringMeasure& m, Complex z, double tol = 1e-12,
                           bool force_closed_form = false) {
    const Complex f = char_det_transfer(m, z).value;
    if (std::abs(f) < root_tolerance(z)) {
        Complex y = 1.0, dy = 0.0;
        const Complex z2 = z * z;
        detail::walk_measure(
            m, [&](double mass) { dy += -z2 * y * mass; },
            [&](double c, double dx) {
                const Complex w = z2 * c * (dx * dx);
                const Complex C = detail::cosw(w), S = detail::sincw(w);
                const Complex y1 = y * C + dy * dx * S;
                dy = -z2 * c * dx * S * y + dy * C;
                y = y1;
            });
        if (std::abs(y) == 0.0) throw Error("phi(length) vanished at a root");
        return y / z - 2.0 * Complex(0.0, 1.0) / y * mode_sq_mass_integral(m, z);
    }
    if (force_closed_form)
        throw NotARoot("closed-form dF/dz is only valid at quasi-eigenvalues");
    const int terms = CharSeries::terms_needed(m.length(), total_mass(m), std::abs(z), tol * 1e-2);
    return CharSeries(m, terms + 2).derivative(z, 1);
}

inline Complex char_det_dz(const DiscreteString& s, Complex z, double tol = 1e-12,
                           bool force_closed_form = false) {
    return char_det_dz(as_measure(s), z, tol, force_closed_form);
}

// Directional derivative of F in the measure at a root:
//   dF/dM (dV) = -(i z / phi(l)) int phi^2 dV.
inline Complex char_det_dmeasure(const DiscreteString& base, Complex z,
                                 const StringMeasure& direction) {
    const CharValue f = char_det(base, z);
    if (std::abs(f.value) > root_tolerance(z))
        throw NotARoot("dF/dM formula requires z in the spectrum of the base string");
    const Complex phi_end = mode_at_vertices(base, z).end_value;
    return -Complex(0.0, 1.0) * z / phi_end * mode_sq_direction_integral(base, z, direction);
}

}  // namespace krein
