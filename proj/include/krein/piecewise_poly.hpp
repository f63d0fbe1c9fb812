#pragma once

#include <vector>

#include "krein/common.hpp"

namespace krein::detail {

// Real piecewise polynomial on [0, L] over a fixed knot grid. Cell q covers
// [knot[q], knot[q+1]] and stores monomial coefficients in the local
// coordinate t = x - knot[q] (keeps monomials bounded on wide intervals).
struct PiecewisePoly {
    std::vector<double> knot;
    std::vector<std::vector<double>> coeff;

    static PiecewisePoly constant(std::vector<double> knots, double c) {
        PiecewisePoly p;
        p.knot = std::move(knots);
        p.coeff.assign(p.knot.size() - 1, {c});
        return p;
    }

    std::size_t cells() const { return coeff.size(); }

    double eval_local(std::size_t q, double t) const {
        const auto& c = coeff[q];
        double v = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) v = v * t + c[k];
        return v;
    }

    double eval(double x) const {
        std::size_t q = 0;
        while (q + 1 < cells() && x > knot[q + 1]) ++q;
        return eval_local(q, x - knot[q]);
    }

    // Definite integral over cell q of t^shift * poly(t) dt, t from 0 to w.
    double cell_moment(std::size_t q, int shift, double w) const {
        const auto& c = coeff[q];
        double v = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) {
            double p = static_cast<double>(k + shift + 1);
            v = v * w + c[k] / p;
        }
        // v = sum c_k w^k / (k+shift+1); multiply by w^(shift+1)
        double ws = w;
        for (int j = 0; j < shift; ++j) ws *= w;
        return v * ws;
    }
};

}  // namespace krein::detail
