#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "krein/billiard.hpp"
#include "krein/charfn.hpp"
#include "krein/common.hpp"
#include "krein/measure.hpp"
#include "krein/spectra.hpp"

namespace krein {

// Validity range of the small-frequency closed forms: |alpha| <= 1/sqrt(m l).
inline double small_freq_limit(double m, double ell) { return 1.0 / std::sqrt(m * ell); }

// Minimal decay rate over the total-mass-m family for small frequencies.
inline double min_decay_small_freq(double alpha, double m, double ell) {
    if (!(m > 0.0) || !(ell > 0.0)) throw InvalidInput("mass budget and length must be positive");
    if (std::abs(alpha) > small_freq_limit(m, ell) * (1.0 + 1e-12))
        throw InvalidInput("frequency outside the closed-form validity range");
    if (alpha == 0.0) return 1.0 / m;
    const double a2 = alpha * alpha;
    const double cut = 1.0 / (m * ell) - 1.0 / (4.0 * ell * ell);
    if (a2 >= cut) return 1.0 / (2.0 * ell);
    return 1.0 / m + std::sqrt(1.0 / (m * m) - a2);
}

// The unique minimal-decay string for small frequencies: a single mass.
inline DiscreteString optimal_string_small_freq(double alpha, double m, double ell) {
    if (std::abs(alpha) > small_freq_limit(m, ell) * (1.0 + 1e-12))
        throw InvalidInput("frequency outside the closed-form validity range");
    const double a2 = alpha * alpha;
    const double cut = 1.0 / (m * ell) - 1.0 / (4.0 * ell * ell);
    if (alpha == 0.0) return make_discrete_string({ell}, {m}, Interval{ell});
    if (a2 < cut) {
        const double a1 =
            ell - 1.0 / (2.0 / m + 2.0 * std::sqrt(1.0 / (m * m) - a2));
        return make_discrete_string({a1}, {m}, Interval{ell});
    }
    const double m1 = 1.0 / (1.0 / (4.0 * ell) + a2 * ell);
    return make_discrete_string({0.0}, {m1}, Interval{ell});
}

struct ChartSeed {
    double beta = 0.0;
    double m1 = 0.0;
    double xi = 0.0;
    int n = 0;
};

struct ParetoPoint {
    double alpha = 0.0;
    double beta = 0.0;
    DiscreteString string;
    enum class Source { zero_frequency, circle_mass, left_end_mass, chart, degenerate_chart };
    Source source = Source::chart;
    double boundary_residual = 0.0;
    double mass_residual = 0.0;
    bool structure_ok = false;
    bool chart_switch = false;  // set by sweeps when beta jumps between neighbors
    bool ok = false;
    std::string note;
    Reconstruction recon;
    ChartSeed seed;
};

inline const char* to_string(ParetoPoint::Source s) {
    switch (s) {
        case ParetoPoint::Source::zero_frequency: return "zero_frequency";
        case ParetoPoint::Source::circle_mass: return "circle_mass";
        case ParetoPoint::Source::left_end_mass: return "left_end_mass";
        case ParetoPoint::Source::chart: return "chart";
        default: return "degenerate_chart";
    }
}

namespace detail {

// Levenberg-Marquardt on a small residual map with box clamping. The map may
// report infeasibility; such trial points are rejected by backtracking.
template <int N, typename Fn>
inline bool levenberg_marquardt(Fn&& fn, std::array<double, N>& x,
                                const std::array<double, N>& lo,
                                const std::array<double, N>& hi, int max_iter,
                                double target) {
    const auto clamp = [&](std::array<double, N>& v) {
        for (int i = 0; i < N; ++i) v[i] = std::min(std::max(v[i], lo[i]), hi[i]);
    };
    clamp(x);
    std::array<double, N> r{};
    if (!fn(x, r)) return false;
    auto norm_inf = [](const std::array<double, N>& v) {
        double n = 0.0;
        for (double e : v) n = std::max(n, std::abs(e));
        return n;
    };
    double lambda = 1e-3;
    for (int iter = 0; iter < max_iter; ++iter) {
        if (norm_inf(r) < target) return true;
        // forward-difference Jacobian
        std::array<std::array<double, N>, N> J{};
        for (int i = 0; i < N; ++i) {
            std::array<double, N> xp = x;
            const double h = 1e-7 * std::max(std::abs(x[i]), 1e-3);
            xp[i] = std::min(x[i] + h, hi[i]);
            const double hh = xp[i] - x[i];
            if (hh == 0.0) {
                xp[i] = x[i] - h;
                std::array<double, N> rp{};
                if (!fn(xp, rp)) return false;
                for (int k = 0; k < N; ++k) J[k][i] = (r[k] - rp[k]) / h;
                continue;
            }
            std::array<double, N> rp{};
            if (!fn(xp, rp)) {
                xp[i] = x[i] - hh;
                if (!fn(xp, rp)) return false;
                for (int k = 0; k < N; ++k) J[k][i] = (r[k] - rp[k]) / hh;
            } else {
                for (int k = 0; k < N; ++k) J[k][i] = (rp[k] - r[k]) / hh;
            }
        }
        // normal equations
        std::array<std::array<double, N>, N> A{};
        std::array<double, N> g{};
        for (int i = 0; i < N; ++i) {
            for (int j = 0; j < N; ++j) {
                double s = 0.0;
                for (int k = 0; k < N; ++k) s += J[k][i] * J[k][j];
                A[i][j] = s;
            }
            double s = 0.0;
            for (int k = 0; k < N; ++k) s += J[k][i] * r[k];
            g[i] = s;
        }
        bool advanced = false;
        for (int damp = 0; damp < 10; ++damp) {
            std::array<std::array<double, N>, N> M = A;
            for (int i = 0; i < N; ++i) M[i][i] += lambda * std::max(A[i][i], 1e-12);
            // Gaussian elimination with partial pivoting
            std::array<double, N> rhs;
            for (int i = 0; i < N; ++i) rhs[i] = -g[i];
            std::array<int, N> piv;
            for (int i = 0; i < N; ++i) piv[i] = i;
            bool singular = false;
            for (int col = 0; col < N && !singular; ++col) {
                int best = col;
                for (int row = col + 1; row < N; ++row)
                    if (std::abs(M[row][col]) > std::abs(M[best][col])) best = row;
                std::swap(M[col], M[best]);
                std::swap(rhs[col], rhs[best]);
                if (std::abs(M[col][col]) < 1e-300) {
                    singular = true;
                    break;
                }
                for (int row = col + 1; row < N; ++row) {
                    const double f = M[row][col] / M[col][col];
                    for (int j = col; j < N; ++j) M[row][j] -= f * M[col][j];
                    rhs[row] -= f * rhs[col];
                }
            }
            if (singular) {
                lambda *= 8.0;
                continue;
            }
            std::array<double, N> step{};
            for (int i = N - 1; i >= 0; --i) {
                double s = rhs[i];
                for (int j = i + 1; j < N; ++j) s -= M[i][j] * step[j];
                step[i] = s / M[i][i];
            }
            std::array<double, N> xn = x;
            for (int i = 0; i < N; ++i) xn[i] += step[i];
            clamp(xn);
            std::array<double, N> rn{};
            if (fn(xn, rn) && norm_inf(rn) < norm_inf(r)) {
                x = xn;
                r = rn;
                lambda = std::max(lambda / 3.0, 1e-12);
                advanced = true;
                break;
            }
            lambda *= 8.0;
        }
        if (!advanced) return norm_inf(r) < target;
    }
    return norm_inf(r) < target;
}

}  // namespace detail

// Candidate from a converged reconstruction; rejects inadmissible strings.
inline std::optional<ParetoPoint> pareto_candidate(const Reconstruction& recon, double alpha,
                                                   double beta, double m,
                                                   ParetoPoint::Source source,
                                                   bool require_full_mass) {
    if (!recon.feasible || recon.masses() == 0) return std::nullopt;
    if (std::abs(recon.boundary_residual) > 1e-9) return std::nullopt;
    const double total = total_mass(recon.string);
    if (total > m * (1.0 + 1e-9)) return std::nullopt;
    if (require_full_mass && std::abs(total - m) > 1e-9 * m) return std::nullopt;
    const StructureReport rep = check_structure(recon);
    if (!rep.all_pass) return std::nullopt;
    ParetoPoint p;
    p.alpha = alpha;
    p.beta = beta;
    p.string = recon.string;
    p.source = source;
    p.boundary_residual = std::abs(recon.boundary_residual);
    p.mass_residual = recon.mass_residual;
    p.structure_ok = true;
    p.ok = true;
    p.recon = recon;
    p.seed = ChartSeed{beta, recon.m1, recon.frame.angle(), static_cast<int>(recon.masses())};
    return p;
}

// Minimal-decay point for one frequency: closed-form branches are always
// evaluated; fixed-n charts are solved by damped least squares on
// [Re F, Im F, total mass - m]; the smallest feasible decay wins.
inline ParetoPoint solve_frontier_point(double alpha, double m, double ell,
                                        const std::optional<ChartSeed>& seed = {}) {
    if (!(m > 0.0) || !(ell > 0.0)) throw InvalidInput("mass budget and length must be positive");
    if (alpha < 0.0) {
        ParetoPoint p = solve_frontier_point(-alpha, m, ell, seed);
        p.alpha = alpha;  // spectra are symmetric under w -> -conj(w)
        return p;
    }
    if (alpha == 0.0) {
        // unique zero-frequency optimum: the full mass at the right end
        ParetoPoint p;
        p.alpha = 0.0;
        p.beta = 1.0 / m;
        p.string = make_discrete_string({ell}, {m}, Interval{ell});
        p.source = ParetoPoint::Source::zero_frequency;
        p.boundary_residual = std::abs(char_det(p.string, Complex(0.0, -1.0 / m)).value);
        p.mass_residual = 0.0;
        p.structure_ok = true;
        p.ok = true;
        p.recon.omega = Complex(0.0, -1.0 / m);
        p.recon.m1 = m;
        p.recon.length = ell;
        p.recon.budget = m;
        p.recon.string = p.string;
        p.recon.trajectory = mode_at_vertices(p.string, p.recon.omega);
        p.recon.vertex_mode = {1.0};
        p.recon.s_values = {0.0};
        p.recon.branch_labels = {1};
        p.recon.termination = Reconstruction::Termination::circle;
        return p;
    }

    std::vector<ParetoPoint> candidates;

    // single mass carrying the whole budget: quasi-eigenvalues on the circle
    if (alpha <= 1.0 / m) {
        const double root = std::sqrt(std::max(0.0, 1.0 / (m * m) - alpha * alpha));
        for (const double beta : {1.0 / m + root, 1.0 / m - root}) {
            if (!(beta > 0.0) || beta < 1.0 / (2.0 * ell)) continue;  // position below 0
            const Complex w(alpha, -beta);
            const Reconstruction rec = reconstruct(w, m, HyperbolaFrame{}, ell, m);
            if (auto c = pareto_candidate(rec, alpha, beta, m,
                                          ParetoPoint::Source::circle_mass, true))
                candidates.push_back(std::move(*c));
        }
    }

    // single mass at the left end with a free amplitude
    {
        const double m1 = 1.0 / (1.0 / (4.0 * ell) + alpha * alpha * ell);
        if (m1 <= m * (1.0 + 1e-12)) {
            const double beta = 1.0 / (2.0 * ell);
            const Complex w(alpha, -beta);
            const Reconstruction rec =
                reconstruct(w, std::min(m1, m), HyperbolaFrame::from_angle(-pi / 2.0), ell, m);
            if (auto c = pareto_candidate(rec, alpha, beta, m,
                                          ParetoPoint::Source::left_end_mass, false))
                candidates.push_back(std::move(*c));
        }
    }

    const double beta_ref =
        candidates.empty() ? 1.0 / m
                           : std::min_element(candidates.begin(), candidates.end(),
                                              [](const auto& a, const auto& b) {
                                                  return a.beta < b.beta;
                                              })
                                 ->beta;

    // multi-mass charts over (beta, m1, xi). Two chart families: the last
    // mass strictly inside (residuals Re F, Im F, mass) and a terminal mass
    // at x = length (residuals Im m_n, supporting-line condition at the end,
    // mass; the boundary condition then holds by construction of m_n).
    {
        std::vector<std::array<double, 3>> starts;
        if (seed && seed->n >= 2)
            starts.push_back({seed->beta, seed->m1, seed->xi});
        for (double fb : {0.45, 0.7, 0.95})
            for (double fm : {0.2, 0.45, 0.7, 0.95})
                for (int kx = 0; kx < 9; ++kx) {
                    const double xi = -pi / 2.0 + 0.12 + (pi - 0.27) * kx / 8.0;
                    starts.push_back({fb * beta_ref, fm * m, xi});
                }
        const std::array<double, 3> lo{1e-6, 1e-9, -pi / 2.0 + 1e-6};
        const std::array<double, 3> hi{1e6, m, pi / 2.0 - 1e-6};

        ReconstructOptions interior_opt;
        ReconstructOptions terminal_opt;
        terminal_opt.terminal_chart = true;

        const auto interior_residual = [&](const std::array<double, 3>& x,
                                           std::array<double, 3>& r) {
            const Complex w(alpha, -x[0]);
            const Reconstruction rec =
                reconstruct(w, x[1], HyperbolaFrame::from_angle(x[2]), ell, m, interior_opt);
            if (!rec.feasible) return false;
            r[0] = rec.boundary_residual.real();
            r[1] = rec.boundary_residual.imag();
            r[2] = rec.mass_residual / m;
            return true;
        };
        const auto terminal_residual = [&](const std::array<double, 3>& x,
                                           std::array<double, 3>& r) {
            const Complex w(alpha, -x[0]);
            const Reconstruction rec =
                reconstruct(w, x[1], HyperbolaFrame::from_angle(x[2]), ell, m, terminal_opt);
            if (!rec.feasible ||
                rec.termination != Reconstruction::Termination::terminal_mass)
                return false;
            r[0] = rec.terminal_mass_value.imag() / m;
            r[1] = rec.end_line_residual();
            r[2] = rec.mass_residual / m;
            return true;
        };

        for (int family = 0; family < 2; ++family) {
            const auto& opt = family == 0 ? interior_opt : terminal_opt;
            for (auto x : starts) {
                const bool converged =
                    family == 0
                        ? detail::levenberg_marquardt<3>(interior_residual, x, lo, hi, 60,
                                                         1e-12)
                        : detail::levenberg_marquardt<3>(terminal_residual, x, lo, hi, 60,
                                                         1e-12);
                if (!converged) continue;
                const Complex w(alpha, -x[0]);
                const Reconstruction rec =
                    reconstruct(w, x[1], HyperbolaFrame::from_angle(x[2]), ell, m, opt);
                if (rec.masses() < 2) continue;  // single-mass solutions come from above
                if (auto c = pareto_candidate(rec, alpha, x[0], m,
                                              ParetoPoint::Source::chart, true))
                    candidates.push_back(std::move(*c));
            }
        }
    }

    // degenerate-frame charts (at most two masses, total mass free)
    {
        ReconstructOptions plain_opt;
        ReconstructOptions terminal_opt;
        terminal_opt.terminal_chart = true;
        const auto frame = HyperbolaFrame::from_angle(-pi / 2.0);
        const auto plain_residual = [&](const std::array<double, 2>& x,
                                        std::array<double, 2>& r) {
            const Complex w(alpha, -x[0]);
            const Reconstruction rec = reconstruct(w, x[1], frame, ell, m, plain_opt);
            if (!rec.feasible) return false;
            r[0] = rec.boundary_residual.real();
            r[1] = rec.boundary_residual.imag();
            return true;
        };
        const auto terminal_residual = [&](const std::array<double, 2>& x,
                                           std::array<double, 2>& r) {
            const Complex w(alpha, -x[0]);
            const Reconstruction rec = reconstruct(w, x[1], frame, ell, m, terminal_opt);
            if (!rec.feasible ||
                rec.termination != Reconstruction::Termination::terminal_mass)
                return false;
            r[0] = rec.terminal_mass_value.imag() / m;
            r[1] = rec.end_line_residual();
            return true;
        };
        const std::array<double, 2> lo{1e-6, 1e-9};
        const std::array<double, 2> hi{1e6, m};
        std::vector<std::array<double, 2>> starts;
        if (seed && seed->n <= 2)
            starts.push_back({seed->beta, seed->m1});
        for (double fb : {0.4, 0.7, 1.0})
            for (double fm : {0.25, 0.5, 0.8})
                starts.push_back({fb * beta_ref, fm * m});
        for (int family = 0; family < 2; ++family) {
            const auto& opt = family == 0 ? plain_opt : terminal_opt;
            for (auto x : starts) {
                const bool converged =
                    family == 0 ? detail::levenberg_marquardt<2>(plain_residual, x, lo, hi,
                                                                 60, 1e-12)
                                : detail::levenberg_marquardt<2>(terminal_residual, x, lo,
                                                                 hi, 60, 1e-12);
                if (!converged) continue;
                const Complex w(alpha, -x[0]);
                const Reconstruction rec = reconstruct(w, x[1], frame, ell, m, opt);
                if (auto c = pareto_candidate(rec, alpha, x[0], m,
                                              ParetoPoint::Source::degenerate_chart, false))
                    candidates.push_back(std::move(*c));
            }
        }
    }

    ParetoPoint best;
    best.alpha = alpha;
    best.ok = false;
    best.note = "no feasible chart converged";
    for (auto& c : candidates)
        if (!best.ok || c.beta < best.beta - 1e-12) best = c;
    return best;
}

// Continuation along an increasing positive grid; each point is seeded by its
// predecessor, and decay jumps well above the local variation are flagged.
inline std::vector<ParetoPoint> sweep_frontier(const std::vector<double>& alphas, double m,
                                               double ell) {
    std::vector<ParetoPoint> out;
    std::optional<ChartSeed> seed;
    std::vector<double> recent_steps;
    double prev_beta = 0.0;
    bool have_prev = false;
    for (std::size_t k = 0; k < alphas.size(); ++k) {
        if (k > 0 && alphas[k] <= alphas[k - 1])
            throw InvalidInput("frequency grid must be strictly increasing");
        ParetoPoint p = solve_frontier_point(alphas[k], m, ell, seed);
        if (p.ok) {
            if (have_prev) {
                const double step = std::abs(p.beta - prev_beta);
                double local = 0.0;
                for (double s : recent_steps) local = std::max(local, s);
                if (recent_steps.size() >= 2 && step > 10.0 * std::max(local, 1e-12))
                    p.chart_switch = true;
                recent_steps.push_back(step);
                if (recent_steps.size() > 5) recent_steps.erase(recent_steps.begin());
            }
            prev_beta = p.beta;
            have_prev = true;
            seed = p.seed;
        } else {
            p.note += " (grid index " + std::to_string(k) + ")";
        }
        out.push_back(std::move(p));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Brute-force sampling oracle.
// ---------------------------------------------------------------------------

struct EmpiricalFrontier {
    struct Bin {
        double center = 0.0;
        double min_beta = 0.0;
        long count = 0;  // 0 marks an empty bin
    };
    std::vector<Bin> bins;
    double bin_width = 0.0;
    double imag_axis_min_beta = std::numeric_limits<double>::infinity();
    long imag_axis_count = 0;
    // min over sampled roots of beta - beta1(alpha) inside the validity range
    double min_margin = std::numeric_limits<double>::infinity();
    long samples = 0;
    long roots = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

template <typename Fn>
inline void parallel_for(long n, int threads, Fn&& fn) {
    if (threads <= 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (long i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

// Random discrete strings (positions uniform, masses Dirichlet-weighted with
// a uniform total in (0, m]); all polynomial roots are binned by frequency.
inline EmpiricalFrontier brute_force_frontier(int n_max, long samples, double m, double ell,
                                              int bins, std::uint64_t seed, int threads = 1,
                                              double alpha_max = -1.0) {
    if (n_max < 1 || n_max > 4) throw InvalidInput("brute force supports 1 <= n_max <= 4");
    if (samples < 1 || bins < 1) throw InvalidInput("need at least one sample and one bin");
    if (alpha_max <= 0.0) alpha_max = small_freq_limit(m, ell);

    struct Local {
        std::vector<double> min_beta;
        std::vector<long> count;
        double imag_min = std::numeric_limits<double>::infinity();
        long imag_count = 0;
        double margin = std::numeric_limits<double>::infinity();
        long roots = 0;
    };
    const int max_threads = std::max(1, threads);
    std::vector<Local> locals(max_threads);
    for (auto& loc : locals) {
        loc.min_beta.assign(bins, std::numeric_limits<double>::infinity());
        loc.count.assign(bins, 0);
    }
    std::atomic<int> slot{0};
    thread_local int my_slot = -1;

    const double width = alpha_max / bins;
    detail::parallel_for(samples, max_threads, [&](long idx) {
        if (my_slot < 0) my_slot = slot.fetch_add(1) % max_threads;
        Local& loc = locals[static_cast<std::size_t>(my_slot)];
        std::mt19937_64 rng(detail::splitmix64(seed ^ static_cast<std::uint64_t>(idx)));
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        std::exponential_distribution<double> expo(1.0);
        const int n = 1 + static_cast<int>(rng() % static_cast<unsigned>(n_max));
        std::vector<double> pos(n), mass(n);
        double wsum = 0.0;
        for (int i = 0; i < n; ++i) {
            pos[i] = ell * u01(rng);
            mass[i] = expo(rng);
            wsum += mass[i];
        }
        const double total = m * std::max(u01(rng), 1e-6);
        for (int i = 0; i < n; ++i) mass[i] *= total / wsum;
        const DiscreteString s = make_discrete_string(pos, mass, Interval{ell});
        if (s.empty()) return;
        for (const Complex& w : detail::polynomial_roots(char_poly(s))) {
            ++loc.roots;
            const double beta = -w.imag();
            const double alpha = std::abs(w.real());
            if (alpha <= 1e-7 * (1.0 + std::abs(w))) {
                loc.imag_min = std::min(loc.imag_min, beta);
                ++loc.imag_count;
                continue;
            }
            if (alpha > alpha_max) continue;
            const int b = std::min(static_cast<int>(alpha / width), bins - 1);
            loc.min_beta[b] = std::min(loc.min_beta[b], beta);
            ++loc.count[b];
            if (alpha <= small_freq_limit(m, ell))
                loc.margin = std::min(loc.margin, beta - min_decay_small_freq(alpha, m, ell));
        }
    });

    EmpiricalFrontier out;
    out.bin_width = width;
    out.samples = samples;
    out.bins.resize(bins);
    for (int b = 0; b < bins; ++b) {
        out.bins[b].center = (b + 0.5) * width;
        out.bins[b].min_beta = std::numeric_limits<double>::infinity();
    }
    for (const Local& loc : locals) {
        for (int b = 0; b < bins; ++b) {
            out.bins[b].min_beta = std::min(out.bins[b].min_beta, loc.min_beta[b]);
            out.bins[b].count += loc.count[b];
        }
        out.imag_axis_min_beta = std::min(out.imag_axis_min_beta, loc.imag_min);
        out.imag_axis_count += loc.imag_count;
        out.min_margin = std::min(out.min_margin, loc.margin);
        out.roots += loc.roots;
    }
    return out;
}

// ---------------------------------------------------------------------------
// The concentrating-layer sequence: layered strings whose lowest mode
// approaches the point-mass bound that no absolutely continuous string attains.
// ---------------------------------------------------------------------------

struct ConcentrationRow {
    double c = 0.0;
    Complex omega_formula;
    Complex omega_contour;
    double gap = 0.0;  // |omega_0 + i/m|
};

inline std::vector<ConcentrationRow> density_concentration_demo(
    double m, double ell, const std::vector<double>& c_list) {
    std::vector<ConcentrationRow> rows;
    for (double c : c_list) {
        if (!(c > 1.0) || !(m < c * ell))
            throw InvalidInput("demo requires c > 1 and m < c * length");
        const double x0 = ell - m / c;
        const double span = ell - x0;
        const double sq = std::sqrt(c);
        ConcentrationRow row;
        row.c = c;
        row.omega_formula =
            Complex(0.0, -std::log((sq + 1.0) / (sq - 1.0)) / (2.0 * span * sq));
        const auto measure = as_measure(
            make_layered_density({{{x0, ell, c}}}, Interval{ell}));
        const double beta0 = -row.omega_formula.imag();
        const double spacing = pi / (span * sq);
        const SearchRegion region{-0.45 * spacing, 0.45 * spacing, 0.5 * beta0, 1.7 * beta0};
        const auto found = spectrum_contour(measure, region);
        if (found.size() != 1)
            throw Error("concentration demo expected exactly one mode in the window");
        row.omega_contour = found.front().omega;
        row.gap = std::abs(row.omega_formula + Complex(0.0, 1.0) / m);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace krein
