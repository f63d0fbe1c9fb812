#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "krein/charfn.hpp"
#include "krein/common.hpp"
#include "krein/measure.hpp"
#include "krein/polyroots.hpp"

namespace krein {

struct QuasiEigenvalue {
    Complex omega;
    int multiplicity = 1;
    double residual = 0.0;

    double frequency() const { return omega.real(); }
    double decay_rate() const { return -omega.imag(); }
};

inline bool spectral_order(const QuasiEigenvalue& a, const QuasiEigenvalue& b) {
    if (a.omega.real() != b.omega.real()) return a.omega.real() < b.omega.real();
    return a.decay_rate() < b.decay_rate();
}

// Rectangle [freq_lo, freq_hi] x [decay_lo, decay_hi] in (Re w, -Im w)
// coordinates; decay_lo > 0 keeps the search inside the open lower half-plane.
struct SearchRegion {
    double freq_lo, freq_hi, decay_lo, decay_hi;

    bool valid() const {
        return freq_lo < freq_hi && decay_lo < decay_hi && decay_lo > 0.0;
    }
    double diameter() const { return std::hypot(freq_hi - freq_lo, decay_hi - decay_lo); }
    bool contains(Complex w, double margin = 0.0) const {
        const double a = w.real(), b = -w.imag();
        return a >= freq_lo + margin && a <= freq_hi - margin && b >= decay_lo + margin &&
               b <= decay_hi - margin;
    }
};

// ---------------------------------------------------------------------------
// Exact characteristic polynomial of a discrete string (ascending powers of
// z). Even coefficients are real, odd ones purely imaginary; the constant
// term is 1. Degree is 2n, or 2n-1 when the last mass sits at x = length.
// ---------------------------------------------------------------------------
inline std::vector<Complex> char_poly(const DiscreteString& s) {
    // polynomials in u = z^2 with real coefficients
    std::vector<double> s0{0.0}, s1{0.0};  // sum phi mu, sum a phi mu
    auto shift_combine = [](double a, const std::vector<double>& p0,
                            const std::vector<double>& p1) {
        // returns 1 - u*(a*p0 - p1)
        std::vector<double> r(std::max(p0.size(), p1.size()) + 1, 0.0);
        r[0] = 1.0;
        for (std::size_t k = 0; k < p0.size(); ++k) r[k + 1] -= a * p0[k];
        for (std::size_t k = 0; k < p1.size(); ++k) r[k + 1] += p1[k];
        return r;
    };
    auto add_scaled = [](std::vector<double>& dst, const std::vector<double>& src, double f) {
        if (dst.size() < src.size()) dst.resize(src.size(), 0.0);
        for (std::size_t k = 0; k < src.size(); ++k) dst[k] += f * src[k];
    };
    for (std::size_t k = 0; k < s.size(); ++k) {
        const double a = s.position[k];
        const std::vector<double> phi = shift_combine(a, s0, s1);
        add_scaled(s0, phi, s.mass[k]);
        add_scaled(s1, phi, a * s.mass[k]);
    }
    const std::vector<double> phi_end = shift_combine(s.length, s0, s1);
    std::vector<Complex> f(2 * std::max(phi_end.size(), s0.size()), 0.0);
    for (std::size_t j = 0; j < phi_end.size(); ++j) f[2 * j] += phi_end[j];
    for (std::size_t j = 0; j < s0.size(); ++j) f[2 * j + 1] += Complex(0.0, -1.0) * s0[j];
    double scale = 0.0;
    for (const Complex& c : f) scale = std::max(scale, std::abs(c));
    while (f.size() > 1 && std::abs(f.back()) <= 1e-300 * std::max(scale, 1.0)) f.pop_back();
    return f;
}

// All roots of the characteristic polynomial with multiplicities grouped by
// the clustering radius 1e-7 (1 + |w|); clusters of size r are re-polished on
// the (r-1)-th derivative, where the multiple root is a simple zero.
inline std::vector<QuasiEigenvalue> spectrum_poly(const DiscreteString& s) {
    std::vector<QuasiEigenvalue> out;
    if (s.empty()) return out;
    const std::vector<Complex> poly = char_poly(s);
    std::vector<Complex> roots = detail::polynomial_roots(poly);
    std::sort(roots.begin(), roots.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    std::vector<bool> used(roots.size(), false);
    for (std::size_t i = 0; i < roots.size(); ++i) {
        if (used[i]) continue;
        Complex rep = roots[i];
        std::vector<std::size_t> cluster{i};
        used[i] = true;
        bool grew = true;
        while (grew) {
            grew = false;
            for (std::size_t j = 0; j < roots.size(); ++j) {
                if (used[j]) continue;
                if (std::abs(roots[j] - rep) <= 1e-7 * (1.0 + std::abs(rep))) {
                    cluster.push_back(j);
                    used[j] = true;
                    Complex mean = 0.0;
                    for (std::size_t k : cluster) mean += roots[k];
                    rep = mean / static_cast<double>(cluster.size());
                    grew = true;
                }
            }
        }
        const int mult = static_cast<int>(cluster.size());
        if (mult >= 2) {
            // the cluster mean is accurate to ~sqrt(eps); polish on d^(r-1)F
            const std::vector<Complex> dpoly = detail::poly_derivative(poly, mult - 1);
            const std::vector<Complex> ddpoly = detail::poly_derivative(dpoly);
            Complex z = rep;
            for (int it = 0; it < 40; ++it) {
                const Complex p = detail::horner(dpoly, z);
                const Complex dp = detail::horner(ddpoly, z);
                if (std::abs(dp) == 0.0) break;
                const Complex step = p / dp;
                z -= step;
                if (std::abs(step) < 1e-16 * (1.0 + std::abs(z))) break;
            }
            if (std::abs(z - rep) <= 1e-6 * (1.0 + std::abs(rep))) rep = z;
        }
        out.push_back(QuasiEigenvalue{rep, mult, std::abs(char_det(s, rep).value)});
    }
    std::sort(out.begin(), out.end(), spectral_order);
    return out;
}

// ---------------------------------------------------------------------------
// Argument-principle contour solver.
// ---------------------------------------------------------------------------

struct ContourOptions {
    double winding_tol = 0.25;      // absolute target on the integer winding number
    double edge_quad_tol = 0.05;    // per-edge quadrature target
    double mult_radius = 1e-6;      // relative cell size that stops subdivision
    int boundary_retries = 5;
    int max_cells = 200000;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
inline constexpr double gk_x[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
inline constexpr double gk_wk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double gk_wg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct EdgeResult {
    Complex integral{0.0, 0.0};
    double error = 0.0;
    bool near_root = false;
};

// Adaptive GK15 of fn along the straight segment [za, zb]. fn reports a
// distance-to-zero estimate |F/F'| per node; an estimate at rounding scale
// means a zero sits on the edge and the winding integral cannot resolve.
template <typename Fn>
inline EdgeResult integrate_edge(Fn&& fn, Complex za, Complex zb, double tol, int depth = 0) {
    const Complex mid = 0.5 * (za + zb), half = 0.5 * (zb - za);
    Complex kron = 0.0, gauss = 0.0;
    bool on_zero = false;
    for (int i = 0; i < 8; ++i) {
        for (int sgn = (i == 7 ? 0 : -1); sgn <= 1; sgn += 2) {
            const Complex z = mid + (sgn * gk_x[i]) * half;
            double dist = std::numeric_limits<double>::infinity();
            const Complex g = fn(z, dist);
            if (!finite(g) || dist < 1e-13 * (1.0 + std::abs(z))) on_zero = true;
            kron += gk_wk[i] * g;
            if (i % 2 == 1) gauss += gk_wg[i / 2] * g;
            if (i == 7) break;
        }
    }
    kron *= half;
    gauss *= half;
    EdgeResult r{kron, std::abs(kron - gauss), on_zero};
    if (r.near_root) return r;
    if (r.error <= tol || depth >= 32) return r;
    const EdgeResult left = integrate_edge(fn, za, mid, tol / 1.8, depth + 1);
    const EdgeResult right = integrate_edge(fn, mid, zb, tol / 1.8, depth + 1);
    r.integral = left.integral + right.integral;
    r.error = left.error + right.error;
    r.near_root = left.near_root || right.near_root;
    return r;
}

struct Cell {
    double alo, ahi, blo, bhi;
    double wa() const { return ahi - alo; }
    double wb() const { return bhi - blo; }
    Complex center() const { return Complex(0.5 * (alo + ahi), -0.5 * (blo + bhi)); }
    Complex corner(int k) const {
        // counterclockwise in C starting from (alo, bhi)
        switch (k & 3) {
            case 0: return Complex(alo, -bhi);
            case 1: return Complex(ahi, -bhi);
            case 2: return Complex(ahi, -blo);
            default: return Complex(alo, -blo);
        }
    }
    bool contains(Complex z, double margin) const {
        return z.real() >= alo - margin && z.real() <= ahi + margin && -z.imag() >= blo - margin &&
               -z.imag() <= bhi + margin;
    }
};

struct WindingResult {
    bool ok = false;
    int winding = 0;
    int bad_edge = -1;  // edge index that saw a near-root or failed quadrature
};

struct ContourEngine {
    std::function<CharValue(Complex)> eval;
    ContourOptions opt;
    long cells_used = 0;

    // logarithmic-derivative integrand; reports |F/F'| for on-edge detection.
    // F below its rounding floor means the node is effectively on a zero.
    Complex logderiv(Complex z, double& dist) const {
        const CharValue v = eval(z);
        const Complex g = *v.derivative / v.value;
        dist = std::abs(v.value) < 1e3 * std::numeric_limits<double>::epsilon() * v.scale
                   ? 0.0
                   : 1.0 / std::abs(g);
        return g;
    }

    WindingResult winding(const Cell& c) {
        WindingResult r;
        Complex total = 0.0;
        double err = 0.0;
        for (int e = 0; e < 4; ++e) {
            const EdgeResult edge = integrate_edge(
                [&](Complex z, double& dist) { return logderiv(z, dist); }, c.corner(e),
                c.corner(e + 1), opt.edge_quad_tol);
            if (edge.near_root) {
                r.bad_edge = e;
                return r;
            }
            total += edge.integral;
            err += edge.error;
        }
        const double w = (total / Complex(0.0, 2.0 * pi)).real();
        const double nearest = std::round(w);
        if (err > opt.winding_tol || std::abs(w - nearest) > opt.winding_tol) {
            r.bad_edge = 4;  // non-integer winding: treat as quadrature trouble
            return r;
        }
        r.ok = true;
        r.winding = static_cast<int>(nearest);
        return r;
    }

    // First moment of the zero set inside the cell: (1/2 pi i) closed-int z F'/F dz.
    Complex zero_moment(const Cell& c) {
        Complex total = 0.0;
        const double tol = 1e-8 * (1.0 + std::abs(c.center()));
        for (int e = 0; e < 4; ++e) {
            const EdgeResult edge = integrate_edge(
                [&](Complex z, double& dist) { return z * logderiv(z, dist); }, c.corner(e),
                c.corner(e + 1), tol);
            total += edge.integral;
        }
        return total / Complex(0.0, 2.0 * pi);
    }
};

}  // namespace detail

// Zeros of F inside the region, counted by rectangle winding numbers,
// isolated by subdivision, polished by Newton (simple zeros) or by the
// boundary first moment (multiple zeros). The evaluator must supply F'.
inline std::vector<QuasiEigenvalue> spectrum_contour_eval(
    const std::function<CharValue(Complex)>& eval, const SearchRegion& region,
    const ContourOptions& opt = {}) {
    if (!region.valid()) throw InvalidInput("search region must be nonempty with decay_lo > 0");
    detail::ContourEngine engine{eval, opt, 0};

    // region-level winding with the outward-nudge retry rule
    detail::Cell root{region.freq_lo, region.freq_hi, region.decay_lo, region.decay_hi};
    const double nudge = 1e-6 * region.diameter();
    detail::WindingResult top;
    for (int attempt = 0;; ++attempt) {
        top = engine.winding(root);
        if (top.ok) break;
        if (attempt >= opt.boundary_retries)
            throw QuadratureFailure("winding number on the region boundary did not resolve");
        switch (top.bad_edge) {
            case 0: root.bhi += nudge; break;
            case 1: root.ahi += nudge; break;
            case 2: root.blo = std::max(0.5 * root.blo, root.blo - nudge); break;
            case 3: root.alo -= nudge; break;
            default:
                root.alo -= nudge; root.ahi += nudge;
                root.blo = std::max(0.5 * root.blo, root.blo - nudge); root.bhi += nudge;
        }
    }

    std::vector<QuasiEigenvalue> out;
    std::vector<std::pair<detail::Cell, int>> work;  // cell + known winding
    if (top.winding != 0) work.push_back({root, top.winding});

    const double fractions[5] = {0.5, 0.537, 0.463, 0.61, 0.39};

    // Locate a (numerically) multiple zero by the boundary first moment.
    // |F| ~ dist^w near the zero, so small boxes integrate pure rounding
    // noise; the moment is taken on the largest enlarged box that still
    // carries the same winding number, where the integrand is clean.
    const auto by_moment = [&](const detail::Cell& cell, int w) {
        Complex c = cell.center();
        const double cell_h = 0.5 * std::max(cell.wa(), cell.wb());
        const double scale = 1.0 + std::abs(c);
        for (double hrel : {1e-2, 1e-3, 1e-4, 1e-5, 0.0}) {
            const double h = std::max(hrel * scale, cell_h);
            detail::Cell box{c.real() - h, c.real() + h, -c.imag() - h, -c.imag() + h};
            const detail::WindingResult chk = engine.winding(box);
            if (!chk.ok || chk.winding != w) continue;
            for (int it = 0; it < 3; ++it) {
                const Complex cnew = engine.zero_moment(box) / static_cast<double>(w);
                if (!finite(cnew) || std::abs(cnew - c) > h) break;
                c = cnew;
                box = detail::Cell{c.real() - h, c.real() + h, -c.imag() - h, -c.imag() + h};
            }
            break;
        }
        out.push_back(QuasiEigenvalue{c, w, std::abs(eval(c).value)});
    };

    while (!work.empty()) {
        if (++engine.cells_used > opt.max_cells)
            throw QuadratureFailure("contour subdivision exceeded the cell budget");
        auto [cell, w] = work.back();
        work.pop_back();

        const Complex center = cell.center();
        const double diam = std::hypot(cell.wa(), cell.wb());

        if (w == 1) {
            // Newton from the cell center, constrained to the neighborhood
            Complex z = center;
            bool converged = false;
            for (int it = 0; it < 60; ++it) {
                const CharValue v = eval(z);
                const Complex step = v.value / *v.derivative;
                if (!finite(step)) break;
                z -= step;
                if (!cell.contains(z, 0.75 * diam)) break;
                if (std::abs(step) < 1e-14 * (1.0 + std::abs(z))) {
                    converged = true;
                    break;
                }
            }
            if (converged && cell.contains(z, 1e-9 * (1.0 + diam))) {
                out.push_back(QuasiEigenvalue{z, 1, std::abs(eval(z).value)});
                continue;
            }
        } else if (diam <= opt.mult_radius * (1.0 + std::abs(center))) {
            by_moment(cell, w);
            continue;
        }

        // split along the longer side; re-split with shifted fractions if a
        // child edge runs into a zero
        bool split_done = false;
        for (double frac : fractions) {
            detail::Cell c1 = cell, c2 = cell;
            if (cell.wa() >= cell.wb()) {
                const double mid = cell.alo + frac * cell.wa();
                c1.ahi = mid;
                c2.alo = mid;
            } else {
                const double mid = cell.blo + frac * cell.wb();
                c1.bhi = mid;
                c2.blo = mid;
            }
            const detail::WindingResult w1 = engine.winding(c1);
            if (!w1.ok) continue;
            const detail::WindingResult w2 = engine.winding(c2);
            if (!w2.ok || w1.winding + w2.winding != w) continue;
            if (w1.winding > 0) work.push_back({c1, w1.winding});
            if (w2.winding > 0) work.push_back({c2, w2.winding});
            split_done = true;
            break;
        }
        // every admissible split line touches a zero: the cell is the zero's
        // own neighborhood, so locate it directly
        if (!split_done) by_moment(cell, w);
    }

    std::sort(out.begin(), out.end(), spectral_order);
    return out;
}

inline std::vector<QuasiEigenvalue> spectrum_contour(const StringMeasure& m,
                                                     const SearchRegion& region,
                                                     const ContourOptions& opt = {}) {
    return spectrum_contour_eval([&m](Complex z) { return char_det_transfer(m, z); }, region,
                                 opt);
}

inline std::vector<QuasiEigenvalue> spectrum_contour(const DiscreteString& s,
                                                     const SearchRegion& region,
                                                     const ContourOptions& opt = {}) {
    return spectrum_contour(as_measure(s), region, opt);
}

// ---------------------------------------------------------------------------
// Cross-validation of the two spectral routes.
// ---------------------------------------------------------------------------

struct CrossValidation {
    bool ok = true;
    double max_distance = 0.0;
    std::size_t pairs = 0;
    std::vector<QuasiEigenvalue> unmatched_poly;
    std::vector<QuasiEigenvalue> unmatched_contour;
};

inline CrossValidation cross_validate(const DiscreteString& s, const SearchRegion& region,
                                      double pair_tol = 1e-8) {
    CrossValidation r;
    const std::vector<QuasiEigenvalue> poly = spectrum_poly(s);
    const std::vector<QuasiEigenvalue> contour = spectrum_contour(s, region);
    std::vector<bool> taken(poly.size(), false);
    for (const QuasiEigenvalue& c : contour) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_i = poly.size();
        for (std::size_t i = 0; i < poly.size(); ++i) {
            if (taken[i]) continue;
            const double d = std::abs(poly[i].omega - c.omega);
            if (d < best) {
                best = d;
                best_i = i;
            }
        }
        if (best_i < poly.size() && best <= pair_tol &&
            poly[best_i].multiplicity == c.multiplicity) {
            taken[best_i] = true;
            r.max_distance = std::max(r.max_distance, best);
            ++r.pairs;
        } else {
            r.unmatched_contour.push_back(c);
            r.ok = false;
        }
    }
    const double margin = 1e-4 * (1.0 + region.diameter());
    for (std::size_t i = 0; i < poly.size(); ++i) {
        if (taken[i]) continue;
        if (region.contains(poly[i].omega, margin)) {
            r.unmatched_poly.push_back(poly[i]);
            r.ok = false;
        }
    }
    return r;
}

}  // namespace krein
