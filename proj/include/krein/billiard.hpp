#pragma once

#include <optional>
#include <string>
#include <vector>

#include "krein/charfn.hpp"
#include "krein/common.hpp"
#include "krein/measure.hpp"

namespace krein {

// Unit normal p of the supporting line L = 1 + i p R, arg0(p) in [-pi/2,
// pi/2). p = -i degenerates the hyperbola {+-sqrt(1 + i p s)} into the
// coordinate axes and L into R.
struct HyperbolaFrame {
    Complex p{1.0, 0.0};

    static HyperbolaFrame from_angle(double xi) {
        if (!(xi >= -pi / 2.0 && xi < pi / 2.0))
            throw InvalidInput("frame angle must lie in [-pi/2, pi/2)");
        return HyperbolaFrame{std::polar(1.0, xi)};
    }
    double angle() const { return arg0(p); }
    bool degenerate() const { return std::abs(p - Complex(0.0, -1.0)) < 1e-14; }
};

inline Complex hyperbola_point(const HyperbolaFrame& frame, double s, int branch) {
    const Complex w = 1.0 + Complex(0.0, 1.0) * frame.p * s;
    if (!frame.degenerate() && w.imag() == 0.0 && w.real() < 0.0)
        throw BranchCutHit("hyperbola parameter hit the branch cut");
    return (branch >= 0 ? 1.0 : -1.0) * sqrt0(w);
}

struct RayHit {
    double t;    // distance along the ray, strictly positive
    double s;    // line parameter of the hit: hit^2 = 1 + i p s
    int branch;  // +1 / -1, 0 when Re(hit) is at rounding scale
};

// Smallest strictly positive t with <(start + t v)^2 - 1, p> = 0. Tangential
// double roots and t below the rounding scale count as no hit.
inline std::optional<RayHit> ray_hyperbola_intersect(Complex start, Complex velocity,
                                                     const HyperbolaFrame& frame) {
    if (std::abs(velocity) == 0.0) throw InvalidInput("ray velocity must be nonzero");
    const double a = dot(velocity * velocity, frame.p);
    const double b = dot(start * velocity, frame.p);
    const double c = dot(start * start - 1.0, frame.p);
    const double t_min = 1e-12 * std::abs(start) / std::abs(velocity);
    const double t = smallest_positive_quadratic_root(a, b, c, t_min);
    if (!(t == t)) return std::nullopt;
    const Complex hit = start + t * velocity;
    RayHit out;
    out.t = t;
    out.s = dot(hit * hit - 1.0, Complex(0.0, 1.0) * frame.p);
    out.branch = hit.real() > 1e-12 ? 1 : (hit.real() < -1e-12 ? -1 : 0);
    return out;
}

struct ReconstructOptions {
    double circle_tol = 1e-9;    // relative window around |w + i/m| = 1/m
    double position_tol = 1e-9;  // relative window for a hit exactly at x = length
    double mass_tol = 1e-9;      // relative terminal-mass drop / reject threshold
    int max_masses = 64;
    // terminal chart: a right-end mass is always attached and the meeting
    // point's supporting-line condition becomes a solver residual instead of
    // a geometric event; interior hits inside the window are not placed
    bool terminal_chart = false;
    double terminal_window = 0.02;  // relative to length
};

// Forward map of the four-parameter reduction: (omega, m1, frame) determine
// the candidate string and its mode. The boundary and mass residuals measure
// how far the parameters are from an actual quasi-eigenvalue configuration.
struct Reconstruction {
    Complex omega;
    double m1 = 0.0;
    HyperbolaFrame frame;
    double length = 1.0;
    double budget = 1.0;

    DiscreteString string;
    std::vector<Complex> vertex_mode;     // billiard-propagated phi at the masses
    std::vector<double> s_values;
    std::vector<int> branch_labels;
    ModeTrajectory trajectory;            // recomputed from the string
    Complex end_mode{1.0, 0.0};           // billiard-propagated phi(length)
    Complex boundary_residual{0.0, 0.0};
    double mass_residual = 0.0;
    Complex terminal_mass_value{0.0, 0.0};

    enum class Termination {
        circle,          // single mass on the circle |w + i/m| = 1/m
        no_return,       // ray never meets the hyperbola again
        beyond_length,   // next meeting point past x = length
        terminal_mass,   // hit at x = length, terminal mass attached
        terminal_zero,   // hit at x = length, terminal mass ~ 0 dropped
        runaway,
        infeasible
    } termination = Termination::no_return;
    bool feasible = true;
    std::string note;

    std::size_t masses() const { return string.size(); }
    // supporting-line residual of the mode square at the right end
    double end_line_residual() const {
        return dot(end_mode * end_mode - 1.0, frame.p);
    }
};

namespace detail {

inline void finish_reconstruction(Reconstruction& r, const std::vector<double>& pos,
                                  const std::vector<double>& mass) {
    r.string = make_discrete_string(pos, mass, Interval{r.length});
    r.trajectory = mode_at_vertices(r.string, r.omega);
    r.boundary_residual = char_det(r.string, r.omega).value;
    r.mass_residual = total_mass(r.string) - r.budget;
}

// Admissible frame for a one-mass string: the middle of the sector of
// supporting-line normals spanned by the trajectory of phi^2 - 1.
inline HyperbolaFrame fit_single_mass_frame(Complex omega, double m1, double a1,
                                            double length) {
    const Complex w2 = omega * omega;
    double xi = arg0(-w2);
    const double xi_start = xi;
    Complex prev = -w2;  // direction of phi^2 - 1 just right of a1
    const int steps = 256;
    for (int k = 1; k <= steps; ++k) {
        const double x = a1 + (length - a1) * k / steps;
        const Complex phi = 1.0 - w2 * m1 * (x - a1);
        const Complex dir = phi * phi - 1.0;
        if (std::abs(dir) == 0.0) continue;
        xi += std::arg(dir / prev);
        prev = dir;
    }
    double angle = 0.5 * (xi_start + xi) - pi;
    if (angle < -pi / 2.0) angle = -pi / 2.0;
    if (angle >= pi / 2.0) angle = pi / 2.0 - 1e-9;
    return HyperbolaFrame::from_angle(angle);
}

}  // namespace detail

inline Reconstruction reconstruct(Complex omega, double m1, const HyperbolaFrame& frame,
                                  double length, double budget,
                                  const ReconstructOptions& opt = {}) {
    if (!(omega.real() > 0.0) || !(omega.imag() < 0.0))
        throw InvalidInput("reconstruction requires Re w > 0 and Im w < 0");
    if (!(m1 > 0.0) || !(length > 0.0) || !(budget > 0.0))
        throw InvalidInput("first mass, length and budget must be positive");

    Reconstruction r;
    r.omega = omega;
    r.m1 = m1;
    r.frame = frame;
    r.length = length;
    r.budget = budget;

    // single mass on the circle: position recovered from Im w alone
    const double circle_dev =
        std::abs(std::abs(omega + Complex(0.0, 1.0) / budget) - 1.0 / budget);
    if (circle_dev <= opt.circle_tol / budget) {
        const double a1 = length + 1.0 / (2.0 * omega.imag());
        if (a1 < 0.0 || a1 >= length) {
            r.feasible = false;
            r.termination = Reconstruction::Termination::infeasible;
            r.note = "circle case: recovered position falls outside [0, length)";
            return r;
        }
        r.termination = Reconstruction::Termination::circle;
        r.m1 = budget;
        r.frame = detail::fit_single_mass_frame(omega, budget, a1, length);
        r.vertex_mode = {1.0};
        r.s_values = {0.0};
        r.branch_labels = {1};
        detail::finish_reconstruction(r, {a1}, {budget});
        r.end_mode = r.trajectory.end_value;
        return r;
    }

    // general case: first mass at x = 0, then iterate the billiard
    const Complex w2 = omega * omega;
    std::vector<double> pos{0.0};
    std::vector<double> mass{m1};
    r.vertex_mode = {1.0};
    r.s_values = {0.0};
    r.branch_labels = {1};

    double x = 0.0;
    Complex phi = 1.0;
    Complex v = -w2 * m1;  // right derivative after the jump at 0

    // attach a right-end mass solving the radiation condition via the jump
    // relation; returns false on an infeasibility certificate
    const auto attach_terminal = [&](Complex phi_end, Complex deriv_left) {
        const Complex m_raw = deriv_left / (w2 * phi_end) - Complex(0.0, 1.0) / omega;
        r.terminal_mass_value = m_raw;
        if (std::abs(m_raw) < opt.mass_tol * budget) {
            r.termination = Reconstruction::Termination::terminal_zero;
            return true;
        }
        if (m_raw.real() < -opt.mass_tol * budget) {
            r.feasible = false;
            r.termination = Reconstruction::Termination::infeasible;
            r.note = "negative terminal mass";
            return false;
        }
        int branch = phi_end.real() > 1e-12 ? 1 : (phi_end.real() < -1e-12 ? -1 : 0);
        if (branch == 0) branch = -r.branch_labels.back();
        pos.push_back(length);
        mass.push_back(std::max(m_raw.real(), 0.0));  // tiny negatives are in the tol window
        r.vertex_mode.push_back(phi_end);
        r.s_values.push_back(dot(phi_end * phi_end - 1.0, Complex(0.0, 1.0) * frame.p));
        r.branch_labels.push_back(branch);
        r.termination = Reconstruction::Termination::terminal_mass;
        return true;
    };

    const double interior_limit = opt.terminal_chart
                                      ? length * (1.0 - opt.terminal_window)
                                      : length * (1.0 - opt.position_tol);

    while (true) {
        if (static_cast<int>(pos.size()) > opt.max_masses) {
            r.feasible = false;
            r.termination = Reconstruction::Termination::runaway;
            r.note = "more than the maximal number of masses";
            return r;
        }
        const auto hit = ray_hyperbola_intersect(phi, v, frame);
        const double x_next = hit ? x + hit->t : std::numeric_limits<double>::infinity();

        if (!hit || x_next >= interior_limit) {
            if (opt.terminal_chart) {
                const Complex phi_end = phi + (length - x) * v;
                if (!attach_terminal(phi_end, v)) return r;
                x = length;
                phi = phi_end;
                break;
            }
            if (!hit) {
                r.termination = Reconstruction::Termination::no_return;
                break;
            }
            if (x_next > length + opt.position_tol * length) {
                r.termination = Reconstruction::Termination::beyond_length;
                break;
            }
            // meeting point exactly at the right end
            const Complex phi_end = phi + hit->t * v;
            if (!attach_terminal(phi_end, v)) return r;
            x = length;
            phi = phi_end;
            break;
        }

        // interior vertex
        const Complex phi_next = phi + hit->t * v;
        int branch = hit->branch;
        if (branch == 0) branch = -r.branch_labels.back();
        if (branch == r.branch_labels.back()) {
            r.feasible = false;
            r.termination = Reconstruction::Termination::infeasible;
            r.note = "consecutive vertices on the same hyperbola branch";
            return r;
        }
        const Complex dphi2_left = 2.0 * phi_next * v;
        const double num = dot(dphi2_left, frame.p);
        const double den = dot(w2 * phi_next * phi_next, frame.p);
        const double m_next = num / den;
        if (!(m_next > 0.0) || !finite(m_next)) {
            r.feasible = false;
            r.termination = Reconstruction::Termination::infeasible;
            r.note = "nonpositive interior mass";
            return r;
        }
        pos.push_back(x_next);
        mass.push_back(m_next);
        r.vertex_mode.push_back(phi_next);
        r.s_values.push_back(hit->s);
        r.branch_labels.push_back(branch);
        x = x_next;
        phi = phi_next;
        v = v - w2 * phi_next * m_next;  // jump relation at the new mass
    }

    r.end_mode = phi + (length - x) * v;
    detail::finish_reconstruction(r, pos, mass);
    return r;
}

// ---------------------------------------------------------------------------
// Structural predicates of optimal reconstructions.
// ---------------------------------------------------------------------------

struct StructureCheck {
    std::string name;
    bool pass = true;
    double residual = 0.0;
};

struct StructureReport {
    std::vector<StructureCheck> checks;
    bool all_pass = true;

    void add(std::string name, bool pass, double residual) {
        all_pass = all_pass && pass;
        checks.push_back(StructureCheck{std::move(name), pass, residual});
    }
};

inline StructureReport check_structure(const Reconstruction& r) {
    StructureReport rep;
    const std::size_t n = r.masses();
    const Complex p = r.frame.p;
    const Complex w2 = r.omega * r.omega;

    if (n == 0) {
        rep.add("nonempty", false, 1.0);
        return rep;
    }

    // (a) line parameters: s_1 = 0, strictly decreasing, above the margin
    rep.add("s_first_zero", std::abs(r.s_values.front()) <= 1e-11,
            std::abs(r.s_values.front()));
    double worst_step = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < n; ++j)
        worst_step = std::min(worst_step, r.s_values[j] - r.s_values[j + 1]);
    if (n >= 2) rep.add("s_decreasing", worst_step > 0.0, std::min(worst_step, 0.0));
    const double margin = dot(w2, p) / (w2.imag());
    double worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j + 1 < n; ++j)
        worst_margin = std::min(worst_margin, r.s_values[j] - margin);
    if (n >= 2) rep.add("s_above_margin", worst_margin > -1e-9, worst_margin);

    // (b) branch alternation +, -, +, ...
    bool alternate = r.branch_labels.front() == 1;
    for (std::size_t j = 0; j + 1 < n; ++j)
        alternate = alternate && r.branch_labels[j] == -r.branch_labels[j + 1];
    rep.add("branch_alternation", alternate, alternate ? 0.0 : 1.0);

    // (c) supporting-line containment of phi^2 along the whole trajectory
    double worst_side = 0.0;
    const int samples = 64;
    for (std::size_t j = 0; j < n; ++j) {
        const double x0 = r.string.position[j];
        const double x1 = j + 1 < n ? r.string.position[j + 1] : r.length;
        for (int k = 0; k <= samples; ++k) {
            const double x = x0 + (x1 - x0) * k / samples;
            const Complex phi = r.trajectory.value_at(x);
            worst_side = std::max(worst_side, dot(phi * phi - 1.0, p));
        }
    }
    rep.add("line_containment", worst_side <= 1e-12, worst_side);

    // (d) reflection law at interior vertices
    double worst_reflect = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        if (r.string.position[j] >= r.length) continue;
        const Complex phi = r.trajectory.vertex_value[j];
        const Complex dplus = 2.0 * phi * r.trajectory.deriv_right[j];
        const Complex dminus = 2.0 * phi * r.trajectory.deriv_left[j];
        worst_reflect = std::max(worst_reflect, std::abs(dot(dplus, p) + dot(dminus, p)));
    }
    rep.add("reflection_law", worst_reflect < 1e-9, worst_reflect);

    // (e) two or more masses force Re w^2 >= 1/(m1 (a2 - a1))
    if (n >= 2) {
        const double bound =
            1.0 / (r.string.mass[0] * (r.string.position[1] - r.string.position[0]));
        rep.add("frequency_bound", w2.real() >= bound - 1e-9, w2.real() - bound);
    }

    // degenerate frame: at most two masses, first at 0, end mode in the
    // closed upper-right quadrant
    if (r.frame.degenerate() &&
        r.termination != Reconstruction::Termination::circle) {
        rep.add("degenerate_mass_count", n <= 2, static_cast<double>(n));
        rep.add("degenerate_first_at_origin", r.string.position.front() == 0.0,
                r.string.position.front());
        rep.add("degenerate_end_mode", r.end_mode.real() >= -1e-9 && r.end_mode.imag() > 0.0,
                std::min(r.end_mode.real(), r.end_mode.imag()));
    }
    return rep;
}

}  // namespace krein
