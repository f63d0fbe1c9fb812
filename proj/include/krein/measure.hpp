#pragma once

#include <algorithm>
#include <array>
#include <utility>
#include <vector>

#include "krein/common.hpp"

namespace krein {

struct Interval {
    double length = 1.0;
    bool valid() const { return finite(length) && length > 0.0; }
};

// Finitely many point masses on [0, length]. Canonical form: positions
// strictly increasing, all masses positive; n = 0 is the zero measure.
struct DiscreteString {
    std::vector<double> position;
    std::vector<double> mass;
    double length = 1.0;

    std::size_t size() const { return position.size(); }
    bool empty() const { return position.empty(); }
};

// Piecewise-constant density on [0, length]: value[k] on
// (breakpoint[k], breakpoint[k+1]]. breakpoint.front() = 0,
// breakpoint.back() = length.
struct LayeredDensity {
    std::vector<double> breakpoint;
    std::vector<double> value;
    double length = 1.0;

    static LayeredDensity zero(double length) {
        return LayeredDensity{{0.0, length}, {0.0}, length};
    }
    std::size_t cells() const { return value.size(); }
    bool is_zero() const {
        return std::all_of(value.begin(), value.end(), [](double c) { return c == 0.0; });
    }
};

// Point masses plus a piecewise-constant density on a shared interval.
struct StringMeasure {
    DiscreteString atoms;
    LayeredDensity density;

    double length() const { return atoms.length; }
};

struct MassBudget {
    double value = 1.0;
    bool valid() const { return finite(value) && value > 0.0; }
};

// Canonicalize: coincident positions (exact bitwise equality) merge by
// summing masses, zero masses are dropped, positions sorted ascending.
inline DiscreteString make_discrete_string(std::vector<double> positions,
                                           std::vector<double> masses,
                                           Interval interval) {
    if (!interval.valid()) throw InvalidInput("interval length must be positive and finite");
    if (positions.size() != masses.size())
        throw InvalidInput("positions and masses must have equal length");
    const std::size_t n = positions.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!finite(positions[i]) || !finite(masses[i]))
            throw InvalidInput("NaN or infinite entry in string description");
        if (positions[i] < 0.0 || positions[i] > interval.length)
            throw InvalidInput("point-mass position outside [0, length]");
        if (masses[i] < 0.0) throw InvalidInput("negative point mass");
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return positions[a] < positions[b]; });
    DiscreteString out;
    out.length = interval.length;
    for (std::size_t k : order) {
        if (masses[k] == 0.0) continue;
        if (!out.position.empty() && out.position.back() == positions[k])
            out.mass.back() += masses[k];
        else {
            out.position.push_back(positions[k]);
            out.mass.push_back(masses[k]);
        }
    }
    return out;
}

// Build a layered density from [x_lo, x_hi, c] triples; gaps are filled with
// zero density. Overlapping layers are rejected.
inline LayeredDensity make_layered_density(std::vector<std::array<double, 3>> layers,
                                           Interval interval) {
    if (!interval.valid()) throw InvalidInput("interval length must be positive and finite");
    std::sort(layers.begin(), layers.end(),
              [](const auto& a, const auto& b) { return a[0] < b[0]; });
    LayeredDensity out;
    out.length = interval.length;
    out.breakpoint.push_back(0.0);
    for (const auto& lay : layers) {
        double lo = lay[0], hi = lay[1], c = lay[2];
        if (!finite(lo) || !finite(hi) || !finite(c))
            throw InvalidInput("NaN or infinite entry in layer description");
        if (c < 0.0) throw InvalidInput("negative layer density");
        if (lo < 0.0 || hi > interval.length || lo >= hi)
            throw InvalidInput("layer endpoints outside [0, length] or not increasing");
        if (lo < out.breakpoint.back()) throw InvalidInput("overlapping layers");
        if (lo > out.breakpoint.back()) {
            out.breakpoint.push_back(lo);
            out.value.push_back(0.0);
        }
        out.breakpoint.push_back(hi);
        out.value.push_back(c);
    }
    if (out.breakpoint.back() < interval.length) {
        out.breakpoint.push_back(interval.length);
        out.value.push_back(0.0);
    }
    return out;
}

inline StringMeasure make_measure(DiscreteString atoms, LayeredDensity density) {
    if (atoms.length != density.length)
        throw InvalidInput("discrete part and density part must share the interval");
    return StringMeasure{std::move(atoms), std::move(density)};
}

inline StringMeasure as_measure(DiscreteString atoms) {
    double length = atoms.length;
    return StringMeasure{std::move(atoms), LayeredDensity::zero(length)};
}

inline StringMeasure as_measure(LayeredDensity density) {
    DiscreteString atoms;
    atoms.length = density.length;
    return StringMeasure{std::move(atoms), std::move(density)};
}

inline double total_mass(const DiscreteString& s) {
    double sum = 0.0;
    for (double m : s.mass) sum += m;
    return sum;
}

inline double total_mass(const LayeredDensity& d) {
    double sum = 0.0;
    for (std::size_t k = 0; k < d.cells(); ++k)
        sum += d.value[k] * (d.breakpoint[k + 1] - d.breakpoint[k]);
    return sum;
}

inline double total_mass(const StringMeasure& m) {
    return total_mass(m.atoms) + total_mass(m.density);
}

// Infimum of the support; equals length for the zero measure.
inline double support_min(const DiscreteString& s) {
    return s.empty() ? s.length : s.position.front();
}

inline double support_min(const LayeredDensity& d) {
    for (std::size_t k = 0; k < d.cells(); ++k)
        if (d.value[k] > 0.0) return d.breakpoint[k];
    return d.length;
}

inline double support_min(const StringMeasure& m) {
    return std::min(support_min(m.atoms), support_min(m.density));
}

// base + t * direction, canonicalized. Used for root tracking and
// directional-derivative verification.
inline StringMeasure scaled_sum(const StringMeasure& base, const StringMeasure& dir, double t) {
    if (base.length() != dir.length()) throw InvalidInput("measures on different intervals");
    std::vector<double> pos = base.atoms.position;
    std::vector<double> mass = base.atoms.mass;
    for (std::size_t i = 0; i < dir.atoms.size(); ++i) {
        pos.push_back(dir.atoms.position[i]);
        mass.push_back(t * dir.atoms.mass[i]);
    }
    DiscreteString atoms = make_discrete_string(std::move(pos), std::move(mass),
                                                Interval{base.length()});

    std::vector<double> knots = base.density.breakpoint;
    knots.insert(knots.end(), dir.density.breakpoint.begin(), dir.density.breakpoint.end());
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    auto value_at = [](const LayeredDensity& d, double x) {
        for (std::size_t k = 0; k < d.cells(); ++k)
            if (x < d.breakpoint[k + 1]) return d.value[k];
        return d.value.empty() ? 0.0 : d.value.back();
    };
    LayeredDensity dens;
    dens.length = base.length();
    dens.breakpoint = knots;
    for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
        double mid = 0.5 * (knots[k] + knots[k + 1]);
        dens.value.push_back(value_at(base.density, mid) + t * value_at(dir.density, mid));
    }
    return StringMeasure{std::move(atoms), std::move(dens)};
}

}  // namespace krein
