#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "calabi/errors.hpp"
#include "calabi/fit.hpp"
#include "calabi/params.hpp"
#include "calabi/profile.hpp"
#include "calabi/series.hpp"

namespace calabi {

inline double rho_of_u(const DerivedConstants& c, double u) {
    return std::exp(-0.5 * c.beta_star * u);
}
inline double u_of_rho(const DerivedConstants& c, double rho) {
    return -2.0 * std::log(rho) / c.beta_star;
}

// ---- apex series: gamma(s) = G(s^n) -------------------------------------

/// Coefficients c_k of gamma(s) = G(s^n) = sum c_k s^k, solving
/// gamma^n (b - a gamma) = s^n. Built from the reduced series H with
/// H^n = 1/(1 - x H): gamma = c1 * s * H(q s), c1 = b^{-1/n}, q = a c1 / b.
struct ApexSeries {
    int n = 2;
    int order = 0;
    std::vector<double> c;  // c[k], k = 0..order, c[0] = 0

    double eval(double s) const {
        double acc = 0.0;
        for (int k = order; k >= 0; --k) acc = acc * s + c[k];
        return acc;
    }

    /// residual of the defining relation at numeric s
    double defect(const DerivedConstants& consts, double s) const {
        const double g = eval(s);
        return std::pow(g, n) * (consts.b - consts.a * g) - std::pow(s, n);
    }
};

/// H^n = 1/(1 - x H), H(0) = 1, solved order by order. The coefficients are
/// rational functions of n only; template so tests can run it exactly.
template <class T>
TruncatedSeries<T> reduced_apex_series(int n, int order) {
    using S = TruncatedSeries<T>;
    S h = S::constant(T(1), order);
    for (int it = 0; it <= order + 1; ++it) {
        // H <- (1 - x H)^{-1/n}
        S xh(order);
        for (int k = 1; k <= order; ++k) xh[k] = -h[k - 1];
        h = S::one_plus_pow(xh, T(-1) / T(n));
    }
    return h;
}

inline ApexSeries series_G(const DerivedConstants& consts, int order) {
    if (order < 1 || order > 20) throw DomainError("series_G: order must be in [1, 20]");
    ApexSeries out;
    out.n = consts.geom.n;
    out.order = order;
    out.c.assign(order + 1, 0.0);
    const double c1 = std::pow(consts.b, -1.0 / consts.geom.n);
    const double q = consts.a * c1 / consts.b;
    auto h = reduced_apex_series<double>(consts.geom.n, order - 1);
    double qp = 1.0;
    for (int k = 1; k <= order; ++k) {
        out.c[k] = c1 * qp * h[k - 1];
        qp *= q;
    }
    return out;
}

// ---- expansion coefficients ----------------------------------------------

/// Coefficients of the apex expansion phi = sum_k a_k rho^{2k} + Green term.
struct ExpansionReport {
    int n = 2;
    double beta = 0, beta_star = 0;
    Normalization gauge = Normalization::Raw;

    // formula side
    std::vector<double> a;  // a[k], k=0..N (gauge-adjusted)
    double a1_formula = 0, a2_formula = 0, a_L = 0;

    // fitted side
    double fitted_a1 = 0, fitted_a2 = 0, fitted_a_L = 0;
    double gauge_offset = 0;      // fitted profile-alignment shift
    double fit_residual = 0;      // max regression residual (phi units)
    double window_rho_lo = 0, window_rho_hi = 0;
};

/// Raw-gauge closed forms: a1 = b^{-(1+1/n)}, a2 = -mu/(2(n+1) b^{2+2/n}),
/// a_L = alpha^n / ((n-1) n (n+1) b^{1+1/n}).
inline double a1_formula_raw(const DerivedConstants& c) {
    return std::pow(c.b, -(1.0 + 1.0 / c.geom.n));
}
inline double a2_formula_raw(const DerivedConstants& c) {
    return -c.mu / (2.0 * (c.geom.n + 1) * std::pow(c.b, 2.0 + 2.0 / c.geom.n));
}
inline double aL_formula_raw(const DerivedConstants& c) {
    const int n = c.geom.n;
    return std::pow(c.alpha(), n) /
           ((n - 1.0) * n * (n + 1.0) * std::pow(c.b, 1.0 + 1.0 / n));
}

/// Gauge transport of expansion data: under the A1 shift the coefficients
/// become a_k / a1^k and the Green coefficient a_L * a1^{n-1}.
inline double gauge_factor_ak(const DerivedConstants& c, Normalization g, int k) {
    if (g == Normalization::Raw) return 1.0;
    return std::pow(a1_formula_raw(c), -k);
}
inline double gauge_factor_aL(const DerivedConstants& c, Normalization g) {
    if (g == Normalization::Raw) return 1.0;
    return std::pow(a1_formula_raw(c), c.geom.n - 1);
}

/// Polynomial part of the apex expansion by series composition through the
/// reduced integral representation; returns a[0..N] in the raw gauge.
inline std::vector<double> polynomial_coefficients_raw(const DerivedConstants& c, int N) {
    if (N < 1 || N > 12) throw DomainError("polynomial_coefficients: N in [1, 12]");
    using S = TruncatedSeries<double>;
    const int n = c.geom.n;
    const double c1 = std::pow(c.b, -1.0 / n);
    const double q = c.a * c1 / c.b;

    // integrand series A(v) = c1 H(q v) / (1 - c1 v H(q v) / lambda)
    auto h = reduced_apex_series<double>(n, N + 1);
    S Hq(N + 1);
    for (int k = 0; k <= N + 1; ++k) Hq[k] = h[k] * std::pow(q, k);
    S vH(N + 1);
    for (int k = 1; k <= N + 1; ++k) vH[k] = Hq[k - 1];
    S denom_arg = vH.scaled(-c1 / c.lambda);
    S A = Hq.scaled(c1) * S::one_plus_pow(denom_arg, -1.0);
    // Phi(w) = (n / (lambda mu)) * int_0^w A(v) dv
    S Phi = A.integrated().scaled(n / (c.lambda * c.mu));

    // solve phi(x) = Phi(x e^{-mu phi / n}) by iteration, x = rho^2
    S phi = S::constant(0.0, N);
    for (int it = 0; it <= N + 1; ++it) {
        S ex = S::exp_of(phi.scaled(-c.mu / n));
        S inner(N);
        for (int k = 1; k <= N; ++k) inner[k] = ex[k - 1];
        S PhiN(N);
        for (int k = 0; k <= N; ++k) PhiN[k] = Phi[k];
        phi = PhiN.compose(inner);
    }
    std::vector<double> out(N + 1);
    for (int k = 0; k <= N; ++k) out[k] = phi[k];
    return out;
}

/// Formula side of the expansion alone: the closed forms for a1, a2, a_L and
/// the composed polynomial coefficients, transported to the requested gauge.
inline ExpansionReport formula_coefficients(const DerivedConstants& c, int N,
                                            Normalization gauge = Normalization::Raw) {
    ExpansionReport rep;
    rep.n = c.geom.n;
    rep.beta = c.beta;
    rep.beta_star = c.beta_star;
    rep.gauge = gauge;
    rep.a1_formula = a1_formula_raw(c) * gauge_factor_ak(c, gauge, 1);
    rep.a2_formula = a2_formula_raw(c) * gauge_factor_ak(c, gauge, 2);
    rep.a_L = aL_formula_raw(c) * gauge_factor_aL(c, gauge);
    auto araw = polynomial_coefficients_raw(c, N);
    rep.a.resize(N + 1);
    for (int k = 0; k <= N; ++k) rep.a[k] = araw[k] * gauge_factor_ak(c, gauge, k);
    return rep;
}

struct FitWindow {
    double rho_hi = 0.4;
    double lo_factor = 3.0;      // rho_lo >= lo_factor * d^{1/(2n)}
    double delta_margin = 30.0;  // and delta = C/rho^{2n} <= 1/delta_margin
    int points = 48;
};

/// Green-coefficient fit: regresses phi_beta - phi_beta* sampled at matched
/// u on the exact gauge-motion shape plus the Green term and the smooth
/// drift corrections, alternating with an exact-gauge realignment:
///   dphi(u) ~ gauge(c) + a0 + a_L d / rho^{2n-2} + b4 d rho^4
///             + b6 d C / rho^{4n-2} + bl d log rho.
inline ExpansionReport fit_expansion(const ProfileSolution& sol_beta,
                                     const ProfileSolution& sol_crit, int N = 4,
                                     const FitWindow& win = {}) {
    const DerivedConstants& cb = sol_beta.consts;
    const DerivedConstants& cc = sol_crit.consts;
    if (sol_beta.normalization != sol_crit.normalization)
        throw DomainError("fit_expansion: profiles must share a normalization");
    if (cc.regime() != AngleRegime::Critical)
        throw DomainError("fit_expansion: second profile must be critical");
    if (cb.regime() != AngleRegime::Supercritical)
        throw DomainError("fit_expansion: first profile must be supercritical");

    const int n = cb.geom.n;
    const double d = cb.beta - cb.beta_star;
    const double C = cb.C_beta;

    ExpansionReport rep;
    rep.n = n;
    rep.beta = cb.beta;
    rep.beta_star = cb.beta_star;
    rep.gauge = sol_beta.normalization;

    // formula side, transported to the profile gauge
    {
        auto formula = formula_coefficients(cb, N, rep.gauge);
        rep.a1_formula = formula.a1_formula;
        rep.a2_formula = formula.a2_formula;
        rep.a_L = formula.a_L;
        rep.a = formula.a;
    }

    // gauge-aware window: rho_gauge^2 = a1 * rho_raw^2, so the physical window
    // bounds pick up a factor sqrt(a1) in the A1 gauge
    const double shift_scale =
        (rep.gauge == Normalization::A1Normalized) ? std::sqrt(a1_formula_raw(cb)) : 1.0;
    const double rho_lo_d = win.lo_factor * std::pow(d, 1.0 / (2.0 * n)) * shift_scale;
    const double rho_lo_delta = std::pow(win.delta_margin * C, 1.0 / (2.0 * n)) * shift_scale;
    const double rho_lo = std::max(rho_lo_d, rho_lo_delta);
    const double rho_hi = win.rho_hi;
    if (!(rho_lo < rho_hi))
        throw WindowError("fit_expansion: window empty, beta too far from beta_*");
    rep.window_rho_lo = rho_lo;
    rep.window_rho_hi = rho_hi;

    const auto rhos = geometric_grid(rho_lo, rho_hi, win.points);
    const std::size_t m = rhos.size();
    std::vector<double> uu(m), tb(m), phib(m), dphi(m);
    for (std::size_t i = 0; i < m; ++i) {
        uu[i] = u_of_rho(cb, rhos[i]);
        auto sb = sol_beta.at_u(uu[i]);
        auto sc = sol_crit.at_u(uu[i]);
        tb[i] = sb.t;
        phib[i] = sb.phi;
        dphi[i] = sb.phi - sc.phi;
    }

    double c_align = 0.0;
    std::vector<double> coef;
    for (int it = 0; it < 8; ++it) {
        std::vector<std::vector<double>> X(m);
        std::vector<double> y(m);
        for (std::size_t i = 0; i < m; ++i) {
            // exact gauge motion of the beta-profile by c_align
            double gauge = 0.0, t_moved = tb[i];
            if (c_align != 0.0) {
                auto moved = sol_beta.at_u(uu[i] - c_align);
                gauge = moved.phi - cb.lambda * c_align - phib[i];
                t_moved = moved.t;
            }
            y[i] = dphi[i] - gauge;
            X[i] = {cb.lambda - t_moved,
                    1.0,
                    d / std::pow(rhos[i], 2 * n - 2),
                    d * std::pow(rhos[i], 4),
                    d * C / std::pow(rhos[i], 4 * n - 2),
                    d * std::log(rhos[i])};
        }
        coef = least_squares(X, y);
        const double dc = coef[0];
        c_align -= dc;
        rep.fitted_a_L = coef[2];
        rep.fit_residual = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double model = 0.0;
            for (std::size_t p = 0; p < coef.size(); ++p) model += coef[p] * X[i][p];
            rep.fit_residual = std::max(rep.fit_residual, std::fabs(y[i] - model));
        }
        if (std::fabs(dc) < 1e-14) break;
    }
    rep.gauge_offset = c_align;

    // polynomial part on the critical profile alone
    {
        const auto prhos = geometric_grid(0.02, 0.3, 40);
        std::vector<std::vector<double>> X(prhos.size());
        std::vector<double> y(prhos.size());
        for (std::size_t i = 0; i < prhos.size(); ++i) {
            const double u2 = u_of_rho(cc, prhos[i]);
            y[i] = sol_crit.at_u(u2).phi;
            std::vector<double> row(4);
            for (int k = 1; k <= 4; ++k) row[k - 1] = std::pow(prhos[i], 2 * k);
            X[i] = row;
        }
        auto pc = least_squares(X, y);
        rep.fitted_a1 = pc[0];
        rep.fitted_a2 = pc[1];
    }
    return rep;
}

// ---- derivative expansions ------------------------------------------------

struct DerivativeReport {
    double slope_2a1_ratio = 0;   // fitted k=1 slope of rho d_rho phi over 2 a1
    double green_exponent = 0;    // fitted log-log exponent of the D1 difference
    int green_sign = 0;           // measured sign of the D1 Green term
    double green_second_ratio = 0;  // D2/D1 Green amplitude ratio (expect 2n-2)
    double metric_ratio_K = 0;    // bound constant of the omega-coefficient ratio
};

inline DerivativeReport fit_derivative_expansions(const ProfileSolution& sol_beta,
                                                  const ProfileSolution& sol_crit,
                                                  double gauge_offset,
                                                  const FitWindow& win = {}) {
    const DerivedConstants& cb = sol_beta.consts;
    const int n = cb.geom.n;
    const double d = cb.beta - cb.beta_star;
    const double bs = cb.beta_star;

    DerivativeReport rep;

    // k=1 slope on the critical profile: rho d_rho phi = (2/beta_*) t -> 2 a1 rho^2
    {
        const double a1 = a1_formula_raw(cb) * gauge_factor_ak(cb, sol_beta.normalization, 1);
        const auto rhos = geometric_grid(1e-3, 1e-2, 12);
        std::vector<double> x(rhos.size()), y(rhos.size());
        for (std::size_t i = 0; i < rhos.size(); ++i) {
            x[i] = rhos[i] * rhos[i];
            y[i] = (2.0 / bs) * sol_crit.at_u(u_of_rho(cb, rhos[i])).t;
        }
        auto lf = fit_line(x, y);
        rep.slope_2a1_ratio = lf.slope / (2.0 * a1);
    }

    // Green term of D1 = rho d_rho phi: difference at matched u, gauge-aligned
    const double C = cb.C_beta;
    const double shift_scale =
        (sol_beta.normalization == Normalization::A1Normalized)
            ? std::sqrt(a1_formula_raw(cb))
            : 1.0;
    const double rho_lo = std::max(win.lo_factor * std::pow(d, 1.0 / (2.0 * n)),
                                   std::pow(win.delta_margin * C, 1.0 / (2.0 * n))) *
                          shift_scale;
    const double rho_hi_green = std::min(win.rho_hi, 0.15);
    if (!(rho_lo < rho_hi_green)) throw WindowError("fit_derivative_expansions: window empty");
    const auto rhos = geometric_grid(rho_lo, rho_hi_green, 24);
    std::vector<double> xs, ys, y2s;
    int sign_seen = 0;
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        const double u2 = u_of_rho(cb, rhos[i]);
        // aligned profile: phi_al(u) = phi_beta(u + c) + lambda c
        auto sb = sol_beta.at_u(u2 + gauge_offset);
        auto sc = sol_crit.at_u(u2);
        const double d1 = (2.0 / bs) * (sb.t - sc.t);
        const double d2 = (4.0 / (bs * bs)) * (sb.V - sc.V);
        if (d1 != 0.0) {
            xs.push_back(rhos[i]);
            ys.push_back(std::fabs(d1));
            y2s.push_back(std::fabs(d2 / d1));
            sign_seen += (d1 < 0.0) ? -1 : 1;
        }
    }
    auto pl = fit_power_law(xs, ys);
    rep.green_exponent = pl.slope;
    rep.green_sign = (sign_seen < 0) ? -1 : 1;
    // amplitude ratio D2/D1 in the window midpoint region
    rep.green_second_ratio = y2s[y2s.size() / 2];

    // omega-coefficient ratio bound: |ratio - 1| <= K (d/r^{2n} + r^{2N-2}), N=2
    {
        double K = 0.0;
        for (std::size_t i = 0; i < rhos.size(); ++i) {
            const double u2 = u_of_rho(cb, rhos[i]);
            auto sb = sol_beta.at_u(u2 + gauge_offset);
            auto sc = sol_crit.at_u(u2);
            const double r = 2.0 * rhos[i];
            const double kappa =
                std::max(std::fabs(sb.V / sc.V - 1.0), std::fabs(sb.t / sc.t - 1.0));
            const double model = d / std::pow(r, 2 * n) + r * r;
            K = std::max(K, kappa / model);
        }
        rep.metric_ratio_K = K;
    }
    return rep;
}

// ---- near-divisor expansion ------------------------------------------------

struct NearDivisorFit {
    double c1 = 0, c2 = 0, beta_fit = 0;
    double c1_formula = 0;  // the initial-value-gauge constant beta/(mu alpha^{n-1})
    double gauge_K = 0;     // lim e^{mu psi - beta u}: fixes c1 in the anchored gauge
    double max_log_residual = 0;
};

/// Fits phi'(u) + alpha ~ c1 e^{beta u} and phi'' ~ c2 e^{beta u} on u << 0,
/// in raw-gauge coordinates. The amplitude c1 is gauge-dependent: the
/// apex-anchored profile carries c1 = K/(beta alpha^{n-1}) with
/// K = lim e^{mu psi - beta u}, while beta/(mu alpha^{n-1}) belongs to the
/// initial-value normalization. Both are reported; the exponent and the
/// ratio c2/c1 = beta are gauge-free.
inline NearDivisorFit near_D_expansion(const ProfileSolution& sol) {
    const DerivedConstants& c = sol.consts;
    if (sol.regime == AngleRegime::Subcritical)
        throw RegimeError("near_D_expansion: use supercritical or critical profiles");
    const double al = c.alpha();
    NearDivisorFit out;
    out.c1_formula = c.beta / (c.mu * std::pow(al, c.geom.n - 1));

    // raw-gauge u where e^{beta u} in [1e-8, 1e-5]
    const double u_hi = -5.0 * std::log(10.0) / c.beta;
    const double u_lo = -8.0 * std::log(10.0) / c.beta;
    std::vector<double> x, y1, y2;
    for (int i = 0; i < 16; ++i) {
        const double ur = u_lo + (u_hi - u_lo) * i / 15.0;
        auto s = sol.at_u(ur + sol.u_shift);
        x.push_back(ur);
        y1.push_back(std::log(al - s.t));
        y2.push_back(std::log(s.V));
    }
    auto f1 = fit_line(x, y1);
    auto f2 = fit_line(x, y2);
    out.beta_fit = f1.slope;
    out.c1 = std::exp(f1.intercept);
    out.c2 = std::exp(f2.intercept);
    out.max_log_residual = std::max(f1.max_residual, f2.max_residual);
    {
        const double um = 0.5 * (u_lo + u_hi);
        auto s = sol.at_u(um + sol.u_shift);
        const double psi_raw = -s.phi - c.lambda * (um);
        out.gauge_K = std::exp(c.mu * psi_raw - c.beta * um);
    }
    if (out.max_log_residual > 1e-3)
        throw FitError("near_D_expansion: exponent fit residual " +
                       std::to_string(out.max_log_residual));
    return out;
}

}  // namespace calabi
