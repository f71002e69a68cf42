#pragma once

#include <cmath>
#include <vector>

#include "calabi/errors.hpp"
#include "calabi/fit.hpp"
#include "calabi/params.hpp"
#include "calabi/profile.hpp"
#include "calabi/quadrature.hpp"

namespace calabi {

// The cohomogeneity-one metric is carried entirely by the three scalar
// coefficient functions of
//   g_beta = ds^2/V(s) + 4 V(s) eta^2 + 2s/(alpha-1) g_D,
// so eta and g_D never materialize as tensors.

/// S_{n+1}(s) = (alpha^{n+1} - s^{n+1})/(alpha - s) as an explicit sum; no
/// cancellation at s -> alpha.
inline double metric_slope_sum(const DerivedConstants& c, double s) {
    const double al = c.alpha();
    double acc = 0.0, sp = 1.0;
    for (int i = 0; i <= c.geom.n; ++i) {
        acc += sp * std::pow(al, c.geom.n - i);
        sp *= s;
    }
    return acc;
}

/// V(s) in the factored form
///   V = s (1 - s/alpha) beta_* (1 + (beta-beta_*) S_{n+1}(s) / ((n+1) beta_* s^n)).
inline double potential_V(const DerivedConstants& c, double s) {
    if (!(s > 0.0 && s < c.alpha())) throw DomainError("potential_V: s must lie in (0, alpha)");
    const int n = c.geom.n;
    const double corr =
        (c.beta - c.beta_star) * metric_slope_sum(c, s) / ((n + 1) * c.beta_star * std::pow(s, n));
    return s * (1.0 - s / c.alpha()) * c.beta_star * (1.0 + corr);
}

/// The unfactored (F(s)+C)/s^{n-1} route, kept as the algebraic-identity
/// counterpart of potential_V.
inline double potential_V_unfactored(const DerivedConstants& c, double s) {
    if (!(s > 0.0 && s < c.alpha())) throw DomainError("potential_V: s must lie in (0, alpha)");
    return (c.F(s) + c.C_beta) / std::pow(s, c.geom.n - 1);
}

/// dV/dbeta = (alpha^{n+1} - s^{n+1}) / (alpha (n+1) s^{n-1}); exact since V
/// is affine in beta.
inline double potential_dV_dbeta(const DerivedConstants& c, double s) {
    return metric_slope_sum(c, s) * (c.alpha() - s) /
           (c.alpha() * (c.geom.n + 1) * std::pow(s, c.geom.n - 1));
}

/// Cone angle along the divisor: fits V(s) ~ (alpha - s) beta near s = alpha
/// and returns 2 pi times the fitted slope. Analytically -V'(alpha) = beta.
inline double cone_angle_at_D(const DerivedConstants& c) {
    const double al = c.alpha();
    const auto xs = geometric_grid(1e-5 * al, 1e-3 * al, 16);
    std::vector<std::vector<double>> X(xs.size());
    std::vector<double> y(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double s = al - xs[i];
        y[i] = potential_V(c, s) / xs[i];
        X[i] = {1.0, xs[i], xs[i] * xs[i]};
    }
    auto coef = least_squares(X, y);
    const double slope = coef[0];
    if (!(std::fabs(slope - c.beta) <= 1e-6 * c.beta))
        throw FitError("cone_angle_at_D: fitted slope " + std::to_string(slope) +
                       " disagrees with beta");
    return 2.0 * M_PI * slope;
}

struct FarConeAngle {
    double angle = 0;            // 2 pi mu (lambda - gamma)
    double decay_rate_fit = 0;   // fitted exponent of phi' + gamma, expect mu (lambda-gamma)
};

/// Cone angle along the divisor at infinity (subcritical only), with the
/// decay-exponent cross-check on the solved profile.
inline FarConeAngle cone_angle_at_infinity(const DerivedConstants& c,
                                           const ProfileSolution& sol) {
    if (c.regime() != AngleRegime::Subcritical)
        throw RegimeError("far cone angle requires beta < beta_*");
    const double gamma = subcritical_gamma(c);
    FarConeAngle out;
    out.angle = 2.0 * M_PI * c.mu * (c.lambda - gamma);

    // phi(u) + gamma u ~ const + c'' e^{-mu(lambda-gamma)u}: fit log(t - gamma)
    const double rate = c.mu * (c.lambda - gamma);
    const double u_lo = 5.0 * std::log(10.0) / rate;
    const double u_hi = 7.0 * std::log(10.0) / rate;
    std::vector<double> x, y;
    for (int i = 0; i < 12; ++i) {
        const double uu = u_lo + (u_hi - u_lo) * i / 11.0;
        const double tt = sol.at_u(uu).t;
        x.push_back(uu);
        y.push_back(std::log(tt - gamma));
    }
    auto lf = fit_line(x, y);
    out.decay_rate_fit = -lf.slope;
    return out;
}

struct ConeComparison {
    double sup_ratio = 0, inf_ratio = 0;
    double kappa = 0;  // max |ratio - 1| over the window
};

/// Ratio bounds of g_beta against g_cone = ds^2/(s beta_*) + 4 s beta_* eta^2
/// + 2s/(alpha-1) g_D over an s-window inside the gluing regime.
inline ConeComparison cone_comparison(const DerivedConstants& c, double s_lo, double s_hi,
                                      double margin = 10.0) {
    if (!(s_lo > 0.0 && s_hi > s_lo && s_hi < c.alpha()))
        throw DomainError("cone_comparison: bad window");
    const double d = c.beta - c.beta_star;
    ConeComparison out;
    out.sup_ratio = -1e300;
    out.inf_ratio = 1e300;
    const auto grid = geometric_grid(s_lo, s_hi, 64);
    for (double s : grid) {
        if (d > 0.0 && !(std::pow(s, c.geom.n) > margin * d))
            throw WindowError("cone_comparison: s^n below the gluing margin");
        const double ratio = potential_V(c, s) / (s * c.beta_star);
        out.sup_ratio = std::max(out.sup_ratio, ratio);
        out.inf_ratio = std::min(out.inf_ratio, ratio);
        out.kappa = std::max(out.kappa, std::fabs(ratio - 1.0));
    }
    return out;
}

struct G1Coefficients {
    double slope_factor = 0;  // (alpha^{n+1}-s^{n+1})/((n+1) beta_* s^n (alpha-s))
    double ds2_coeff = 0;
    double eta2_coeff = 0;
    double dV_dbeta = 0;
};

/// Coefficients of the beta-linearization g1 of the metric family at s.
/// g1 = slope_factor * (-ds^2/(s(1-s/alpha)beta_*) + 4 s (1-s/alpha) beta_* eta^2).
inline G1Coefficients g1_linearization(const DerivedConstants& c, double s) {
    if (!(s > 0.0 && s < c.alpha())) throw DomainError("g1_linearization: s interior required");
    G1Coefficients out;
    const int n = c.geom.n;
    out.slope_factor = metric_slope_sum(c, s) / ((n + 1) * c.beta_star * std::pow(s, n));
    const double base = s * (1.0 - s / c.alpha()) * c.beta_star;
    out.ds2_coeff = -out.slope_factor / base;
    out.eta2_coeff = 4.0 * out.slope_factor * base;
    out.dV_dbeta = potential_dV_dbeta(c, s);
    return out;
}

struct CollapseReport {
    double ratio_325 = 0;            // (F(lambda)+C) 2(alpha-1)/(alpha^n beta^2)
    double sup_4V = 0;               // sup of the circle coefficient
    double circle_length_lambda = 0;  // 4 pi sqrt(V(lambda))
    double interval_half_length = 0;  // int_gamma^alpha ds/sqrt(V)
    double transverse_factor_limit = 0;  // 2s/(alpha-1) at s -> alpha
};

/// Small-angle collapse diagnostics (subcritical, beta <= 0.05): the circle
/// fiber shrinks at rate O(beta) while the transverse interval stays O(1).
inline CollapseReport small_beta_collapse(const DerivedConstants& c) {
    if (c.regime() != AngleRegime::Subcritical || c.beta > 0.05)
        throw RegimeError("small_beta_collapse expects subcritical beta <= 0.05");
    CollapseReport out;
    const double gamma = subcritical_gamma(c);
    out.ratio_325 = (c.F_at_lambda() + c.C_beta) * 2.0 * (c.alpha() - 1.0) /
                    (std::pow(c.alpha(), c.geom.n) * c.beta * c.beta);
    out.circle_length_lambda = 4.0 * M_PI * std::sqrt(potential_V(c, c.lambda));
    out.transverse_factor_limit = 2.0 * c.alpha() / (c.alpha() - 1.0);

    const auto grid = geometric_grid(1e-4, 1.0 - 1e-4, 200);
    for (double frac : grid) {
        const double s = gamma + (c.alpha() - gamma) * frac;
        out.sup_4V = std::max(out.sup_4V, 4.0 * potential_V(c, s));
    }

    // int_gamma^alpha ds/sqrt(V): 1/sqrt vanishing linearly at both ends;
    // substitute s = gamma + x^2 resp. s = alpha - x^2
    const double mid = 0.5 * (gamma + c.alpha());
    auto left = [&](double x) { return 2.0 * x / std::sqrt(potential_V(c, gamma + x * x)); };
    auto right = [&](double x) { return 2.0 * x / std::sqrt(potential_V(c, c.alpha() - x * x)); };
    out.interval_half_length =
        integrate(left, 0.0, std::sqrt(mid - gamma), 1e-10).value +
        integrate(right, 0.0, std::sqrt(c.alpha() - mid), 1e-10).value;
    return out;
}

// ---- one-dimensional Futaki-type rigidity check ---------------------------

struct BarrierSpec {
    double u_join = 2.0;    // blend interval [-u_join, u_join]
    double u_offset = 0.0;  // translation of the barrier
    bool constant_f = false;  // degenerate f == 1 case
};

struct RigidityReport {
    double ratio = 0;  // int f phi'' / int phi''
    double gap = 0;    // 1 - ratio
    bool strict = false;
};

namespace detail {

// C^2 convex join of -u + e^u (left tail) and e^{-u} (right tail) across
// [-uj, uj]. The second derivative on the join is the matched constant
// e^{-uj} plus quintic bump corrections whose two amplitudes are fixed by
// the slope- and value-matching integrals:
//   w1 = x^2(1-x)^2,  w2 = (x - 1/2) w1,   x = (u+uj)/(2uj).
// (A straight quintic blend of the two functions is never convex here.)
struct Barrier {
    double uj;
    double L, e0, A1, A2;

    explicit Barrier(double u_join) : uj(u_join) {
        L = 2.0 * uj;
        e0 = std::exp(-uj);
        // int phi'' = 1 - 2 e0 (slope match), int w1 = 1/30
        A1 = 30.0 * (1.0 - 2.0 * e0 - L * e0) / L;
        // value match: phi(uj) - phi(-uj) = -uj with phi'(-uj) = -1 + e0;
        // int (1-x) w1 = 1/60, int (1-x) w2 = -1/840
        const double target = (-uj - (-1.0 + e0) * L) / (L * L);
        A2 = 840.0 * (0.5 * e0 + A1 / 60.0 - target);
    }

    static double w1(double x) { return x * x * (1.0 - x) * (1.0 - x); }
    static double w2(double x) { return (x - 0.5) * w1(x); }
    // antiderivatives of w1, w2 vanishing at 0
    static double W1(double x) {
        return x * x * x / 3.0 - 0.5 * x * x * x * x + 0.2 * x * x * x * x * x;
    }
    static double W2(double x) {
        const double x3 = x * x * x;
        return -x3 / 6.0 + 0.5 * x3 * x - 0.5 * x3 * x * x + x3 * x3 / 6.0;
    }

    double phi2(double u) const {  // phi''
        if (u <= -uj) return std::exp(u);
        if (u >= uj) return std::exp(-u);
        const double x = (u + uj) / L;
        return e0 + A1 * w1(x) + A2 * w2(x);
    }
    double phi1(double u) const {  // f = -phi'
        if (u <= -uj) return 1.0 - std::exp(u);
        if (u >= uj) return std::exp(-u);
        const double x = (u + uj) / L;
        const double dphi = (-1.0 + e0) + e0 * (u + uj) + A1 * L * W1(x) + A2 * L * W2(x);
        return -dphi;
    }
};

}  // namespace detail

/// The 1-D reduction behind the rigidity of the critical angle: for a convex
/// nonincreasing barrier interpolating -u+e^u and e^{-u}, the phi''-average
/// of f = -phi' is strictly below its divisor value 1.
inline RigidityReport futaki_rigidity_check(const BarrierSpec& spec = {}) {
    RigidityReport out;
    if (spec.constant_f) {
        // f == 1: the chain degenerates to equality, flagged non-strict
        out.ratio = 1.0;
        out.gap = 0.0;
        out.strict = false;
        return out;
    }
    if (!(spec.u_join > 0.0)) throw BarrierError("u_join must be positive");
    detail::Barrier bar(spec.u_join);

    // convexity / monotonicity checks on a dense grid
    for (int i = 0; i <= 400; ++i) {
        const double uu = -spec.u_join + 2.0 * spec.u_join * i / 400.0;
        if (!(bar.phi2(uu) > 0.0)) throw BarrierError("barrier not convex at the blend");
        if (!(bar.phi1(uu) > 0.0)) throw BarrierError("barrier not decreasing at the blend");
    }

    const double uj = spec.u_join, off = spec.u_offset;
    auto f_phi2 = [&](double uu) { return bar.phi1(uu - off) * bar.phi2(uu - off); };
    auto phi2 = [&](double uu) { return bar.phi2(uu - off); };
    // analytic tails + numeric middle
    const double tail_mass_left = std::exp(-uj);                      // int_-inf^-uj e^u
    const double tail_f_left = std::exp(-uj) - 0.5 * std::exp(-2.0 * uj);
    const double tail_mass_right = std::exp(-uj);                     // int_uj^inf e^-u
    const double tail_f_right = 0.5 * std::exp(-2.0 * uj);
    const double mid_mass = integrate(phi2, -uj + off, uj + off, 1e-12).value;
    const double mid_f = integrate(f_phi2, -uj + off, uj + off, 1e-12).value;

    const double num = tail_f_left + tail_f_right + mid_f;
    const double den = tail_mass_left + tail_mass_right + mid_mass;
    out.ratio = num / den;
    out.gap = 1.0 - out.ratio;
    out.strict = out.gap > 0.0;
    return out;
}

}  // namespace calabi
