#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "calabi/errors.hpp"

namespace calabi {

struct QuadratureResult {
    double value = 0.0;
    double error_estimate = 0.0;
    int evaluations = 0;
};

namespace detail {

// Gauss 7 / Kronrod 15 nodes and weights on [-1, 1].
inline constexpr double kKronrodNodes[8] = {
    0.00000000000000000, 0.20778495500789847, 0.40584515137739717, 0.58608723546769113,
    0.74153118559939444, 0.86486442335976907, 0.94910791234275852, 0.99145537112081264};
inline constexpr double kKronrodWeights[8] = {
    0.20948214108472783, 0.20443294007529889, 0.19035057806478541, 0.16900472663926790,
    0.14065325971552592, 0.10479001032225018, 0.06309209262997855, 0.02293532201052922};
inline constexpr double kGaussWeights[4] = {
    0.41795918367346939, 0.38183005050511894, 0.27970539148927667, 0.12948496616886969};

template <class F>
inline void gk15(const F& f, double a, double b, double& kronrod, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f0 = f(mid);
    double gauss = kGaussWeights[0] * f0;
    kronrod = kKronrodWeights[0] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * kKronrodNodes[i];
        const double fsum = f(mid - dx) + f(mid + dx);
        kronrod += kKronrodWeights[i] * fsum;
        if (i % 2 == 0) gauss += kGaussWeights[i / 2] * fsum;
    }
    kronrod *= half;
    gauss *= half;
    const double diff = std::fabs(kronrod - gauss);
    // standard QUADPACK-style error inflation
    err = diff * std::sqrt(diff) * 200.0;
    if (err > diff) err = diff;
    err = std::max(err, std::fabs(kronrod) * 1e-16);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [a, b].
/// Splits the worst interval first; throws ConvergenceError when the
/// interval budget is exhausted before reaching the tolerance.
template <class F>
QuadratureResult integrate(const F& f, double a, double b, double rel_tol = 1e-11,
                           double abs_tol = 0.0, int max_intervals = 4000) {
    QuadratureResult out;
    if (a == b) return out;
    if (a > b) {
        out = integrate(f, b, a, rel_tol, abs_tol, max_intervals);
        out.value = -out.value;
        return out;
    }

    struct Piece {
        double a, b, value, err;
    };
    std::vector<Piece> pieces;
    pieces.reserve(64);

    double v, e;
    detail::gk15(f, a, b, v, e);
    out.evaluations = 15;
    pieces.push_back({a, b, v, e});

    auto tolerance = [&](double total) {
        return std::max(abs_tol, rel_tol * std::fabs(total));
    };

    while (true) {
        double total = 0.0, err = 0.0;
        std::size_t worst = 0;
        for (std::size_t i = 0; i < pieces.size(); ++i) {
            total += pieces[i].value;
            err += pieces[i].err;
            if (pieces[i].err > pieces[worst].err) worst = i;
        }
        if (err <= tolerance(total) || err <= 1e-300) {
            out.value = total;
            out.error_estimate = err;
            return out;
        }
        if (static_cast<int>(pieces.size()) >= max_intervals)
            throw ConvergenceError("adaptive quadrature: interval budget exhausted, err=" +
                                   std::to_string(err));
        Piece p = pieces[worst];
        const double mid = 0.5 * (p.a + p.b);
        if (mid <= p.a || mid >= p.b) {
            // interval at machine resolution; accept its estimate
            pieces[worst].err = 0.0;
            continue;
        }
        Piece left{p.a, mid, 0, 0}, right{mid, p.b, 0, 0};
        detail::gk15(f, left.a, left.b, left.value, left.err);
        detail::gk15(f, right.a, right.b, right.value, right.err);
        out.evaluations += 30;
        pieces[worst] = left;
        pieces.push_back(right);
    }
}

/// Integrate f over [a, +inf) via the substitution x = a + e^t - 1 ...
/// actually t-domain [0, inf) mapped with x = a - log(1-s) is awkward;
/// we use x = a + s/(1-s), s in [0,1).
template <class F>
QuadratureResult integrate_to_infinity(const F& f, double a, double rel_tol = 1e-11,
                                       double abs_tol = 0.0) {
    auto g = [&](double s) {
        const double om = 1.0 - s;
        const double x = a + s / om;
        return f(x) / (om * om);
    };
    return integrate(g, 0.0, 1.0 - 1e-14, rel_tol, abs_tol);
}

}  // namespace calabi
