#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "calabi/errors.hpp"
#include "calabi/params.hpp"
#include "calabi/quadrature.hpp"
#include "calabi/roots.hpp"

namespace calabi {

/// F(t) = t^n (b - a t) on [0, alpha] with its two monotone inverses
/// G1: [0, F(lambda)] -> [0, lambda] and G2: [-C_beta, F(lambda)] -> [lambda, alpha].
struct StructureFunction {
    DerivedConstants consts;

    enum class Branch { G1, G2 };

    double eval(double t) const { return consts.F(t); }
    double derivative(double t) const { return consts.dF(t); }
    double at_lambda() const { return consts.F_at_lambda(); }

    double invert(Branch branch, double s) const {
        const double F_lam = at_lambda();
        const double lo_val = (branch == Branch::G1) ? 0.0 : -consts.C_beta;
        const double slack = 1e-12 * std::max(1.0, std::fabs(F_lam));
        if (s < lo_val - slack || s > F_lam + slack)
            throw RangeError("invert_F: s outside branch range");
        s = std::clamp(s, lo_val, F_lam);

        double lo, hi;
        if (branch == Branch::G1) {
            lo = 0.0;
            hi = consts.lambda;
        } else {
            lo = consts.lambda;
            hi = consts.alpha();
        }
        if (s == F_lam) return consts.lambda;
        auto f = [&](double t) { return consts.F(t) - s; };
        auto df = [&](double t) { return consts.dF(t); };
        // the endpoint residues F(alpha)+C and F(0) are pure rounding; accept
        // the endpoint when the bracket fails there
        const double f_lo = f(lo), f_hi = f(hi);
        const double end_tol = 1e-14 * std::max(1.0, std::fabs(s));
        if (std::fabs(f_lo) <= end_tol) return lo;
        if (std::fabs(f_hi) <= end_tol) return hi;
        if ((f_lo < 0) == (f_hi < 0))
            throw RangeError("invert_F: bracket lost at branch endpoint");
        return newton_bisect(f, df, lo, hi, 1e-15);
    }
};

enum class Normalization { Raw, A1Normalized };

inline const char* to_string(Normalization n) {
    return n == Normalization::Raw ? "raw" : "a1";
}

/// t-grid layout: log-spaced in (alpha - t) toward the divisor end and in
/// (t - t_min) toward the apex end, joined at the nexus t = lambda.
/// The default 48 points per decade is the geometric ratio 1.05.
struct GridSpec {
    int points_per_decade = 48;
    int decades_to_divisor = 12;
    int decades_to_apex = 12;
    std::optional<double> t_floor;  // optional absolute floor for requested t

    int total_points() const {
        return points_per_decade * (decades_to_divisor + decades_to_apex) + 1;
    }
    void validate() const {
        if (points_per_decade < 1 || decades_to_divisor < 1 || decades_to_apex < 1)
            throw DomainError("grid spec fields must be positive");
        if (total_points() < 64)
            throw DomainError("grid resolution must be >= 64 points, got " +
                              std::to_string(total_points()));
    }
};

struct ProfileSample {
    double t = 0, u = 0, phi = 0, psi = 0, V = 0;
};

namespace detail {

/// F(t) + C_beta factored at the apex-side root gamma:
/// F(t) - F(gamma) = (t - gamma) * [ b sum_{i<n} t^i g^{n-1-i} - a sum_{i<n+1} t^i g^{n-i} ].
/// The alpha-side factored form of DerivedConstants loses all digits
/// near gamma; this one stays at ~1e-15 relative there.
inline double F_plus_C_gamma(const DerivedConstants& c, double gamma, double t) {
    const int n = c.geom.n;
    double sb = 0.0, sa = 0.0, tp = 1.0;
    for (int i = 0; i < n; ++i) {
        sb += tp * std::pow(gamma, n - 1 - i);
        sa += tp * std::pow(gamma, n - i);
        tp *= t;
    }
    sa += tp;  // i = n term of the (n+1)-sum
    return (t - gamma) * (c.b * sb - c.a * sa);
}

/// Regime-aware evaluation used by every profile quadrature: gamma-form
/// below the nexus for subcritical angles, alpha-form otherwise.
inline double F_plus_C_stable(const DerivedConstants& c, double gamma, double t) {
    if (gamma > 0.0 && t < c.lambda) return F_plus_C_gamma(c, gamma, t);
    return c.F_plus_C(t);
}

}  // namespace detail

/// Solved radial profile over the moment-map coordinate t = -phi'.
///
/// Columns are stored with t strictly decreasing / u strictly increasing.
/// The Raw gauge anchors phi at the apex (phi(t_min+) = 0; subcritical
/// anchors phi(lambda) = 0 since both ends diverge) and then u is pinned by
/// the first integral: u = (-phi - psi)/lambda with psi = mu^-1 log(F+C).
/// A1Normalized shifts u by a constant so the leading expansion coefficient
/// a1 of phi in rho^2 = e^{-beta_* u} becomes 1; the Monge-Ampere equation
/// then carries the factor b^{n+1} (stored as ma_scale).
class ProfileSolution {
  public:
    DerivedConstants consts;
    AngleRegime regime = AngleRegime::Critical;
    Normalization normalization = Normalization::Raw;

    std::vector<double> t, u, phi, psi, V;  // ascending u / descending t

    double t_min = 0.0;             // 0 (critical/supercritical) or gamma (subcritical)
    double u_shift = 0.0;           // gauge u = raw u + u_shift
    double ma_scale = 1.0;          // RHS factor of the Monge-Ampere equation
    double u_nexus = 0.0;           // gauge u at t = lambda
    double psi_nexus = 0.0;
    std::optional<double> u_extinct;  // supercritical only (gauge u)

    double u_front() const { return u.front(); }
    double u_back() const { return u.back(); }

    // ---- pointwise evaluation -------------------------------------------

    double fc(double tq) const { return detail::F_plus_C_stable(consts, gamma_root(), tq); }
    double gamma_root() const {
        return (regime == AngleRegime::Subcritical) ? t_min : -1.0;
    }

    double psi_raw_of_t(double tq) const { return std::log(fc(tq)) / consts.mu; }
    double V_of_t(double tq) const { return fc(tq) / std::pow(tq, consts.n() - 1); }
    double dphi_dt(double tq) const { return std::pow(tq, consts.n()) / fc(tq); }
    double du_dt_raw(double tq) const { return -std::pow(tq, consts.n() - 1) / fc(tq); }

    /// phi at arbitrary t via a local panel from the nearest stored node.
    double phi_of_t(double tq) const {
        const std::size_t k = nearest_index(tq);
        auto g = [&](double x) { return dphi_dt(x); };
        return phi[k] + integrate(g, t[k], tq, 1e-12, 1e-15).value;
    }

    /// raw-gauge u at arbitrary t (algebraic identity, no drift).
    double u_raw_of_t(double tq) const {
        return (-phi_of_t(tq) - psi_raw_of_t(tq)) / consts.lambda;
    }

    ProfileSample at_t(double tq) const {
        if (!(tq > t_min && tq < consts.alpha()))
            throw RangeError("at_t: t outside profile domain");
        ProfileSample s;
        s.t = tq;
        s.phi = phi_of_t(tq);
        s.u = (-s.phi - psi_raw_of_t(tq)) / consts.lambda + u_shift;
        s.psi = -s.phi - consts.lambda * s.u;
        s.V = V_of_t(tq);
        return s;
    }

    /// Inversion of u(t): Newton on the analytic du/dt from a bracketing
    /// grid node. |u(t_returned) - u| stays below ~1e-12 of scale.
    ProfileSample at_u(double uq) const {
        if (!(uq >= u.front() && uq <= u.back()))
            throw RangeError("sample_at_u: u=" + std::to_string(uq) + " outside [" +
                             std::to_string(u.front()) + ", " + std::to_string(u.back()) + "]");
        // endpoints: return the stored node directly (the inversion bracket
        // degenerates there)
        const double end_tol = 1e-12 * std::max(1.0, std::fabs(uq));
        if (uq - u.front() <= end_tol) return node_sample(0);
        if (u.back() - uq <= end_tol) return node_sample(u.size() - 1);
        // u ascending; locate bracket
        const auto it = std::lower_bound(u.begin(), u.end(), uq);
        std::size_t hi = std::min<std::size_t>(u.size() - 1, it - u.begin());
        std::size_t lo = (hi == 0) ? 0 : hi - 1;
        if (hi == lo) hi = lo + 1;
        // queries at (or within rounding of) a stored node: the bracket
        // degenerates against quadrature noise, so return the node itself
        for (std::size_t j : {lo, hi})
            if (std::fabs(u[j] - uq) <= 4e-13 * std::max(1.0, std::fabs(uq)))
                return node_sample(j);

        // t decreasing in u: bracket in t is [t[hi], t[lo]]
        double ta = t[hi], tb = t[lo];
        const double u_anchor = u[lo] - u_shift;
        const double t_anchor = t[lo];
        auto u_raw_local = [&](double tt) {
            auto g = [&](double x) { return du_dt_raw(x); };
            return u_anchor + integrate(g, t_anchor, tt, 1e-13, 1e-16).value;
        };
        const double target = uq - u_shift;
        const double u_tol = 1e-13 * std::max(1.0, std::fabs(target));

        // Newton on the u-residual with bisection safeguard; the loop also
        // stops when the t-bracket reaches machine resolution (deep tails
        // where u is no longer resolvable in t).
        double fa = u_raw_local(ta) - target;
        double tq = 0.5 * (ta + tb);
        for (int iter = 0; iter < 200; ++iter) {
            const double fq = u_raw_local(tq) - target;
            if (std::fabs(fq) <= u_tol) break;
            if ((fq < 0) == (fa < 0)) {
                ta = tq;
                fa = fq;
            } else {
                tb = tq;
            }
            const double d = du_dt_raw(tq);
            double tn = tq - fq / d;
            if (!(tn > std::min(ta, tb) && tn < std::max(ta, tb))) tn = 0.5 * (ta + tb);
            if (tn == tq || std::fabs(tb - ta) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                                       std::max(std::fabs(ta), std::fabs(tb))) {
                tq = tn;
                break;
            }
            tq = tn;
        }
        ProfileSample s = at_t(tq);
        s.u = uq;  // suppress the last-ulp inversion residue
        s.psi = -s.phi - consts.lambda * uq;
        return s;
    }

    double phi_prime_at_u(double uq) const { return -at_u(uq).t; }

  private:
    ProfileSample node_sample(std::size_t i) const {
        return ProfileSample{t[i], u[i], phi[i], psi[i], V[i]};
    }

    std::size_t nearest_index(double tq) const {
        // t descending
        auto it = std::lower_bound(t.begin(), t.end(), tq, std::greater<double>());
        std::size_t k = std::min<std::size_t>(t.size() - 1, it - t.begin());
        if (k > 0 && std::fabs(t[k - 1] - tq) < std::fabs(t[k] - tq)) --k;
        return k;
    }
};

/// gamma = G1(-C_beta): left root of F(gamma) = -C_beta, subcritical only.
inline double subcritical_gamma(const DerivedConstants& c) {
    if (c.regime() != AngleRegime::Subcritical)
        throw RegimeError("gamma is defined only for subcritical angles");
    // F_plus_C(gamma) = 0 on (0, lambda)
    auto f = [&](double t) { return c.F_plus_C(t); };
    auto df = [&](double t) { return c.dF(t); };
    double lo = 1e-300, hi = c.lambda;
    return newton_bisect(f, df, lo, hi, 1e-15);
}

namespace detail {

inline std::vector<double> build_t_grid(const DerivedConstants& c, const GridSpec& spec,
                                        double t_min) {
    spec.validate();
    const double alpha = c.alpha();
    const double lam = c.lambda;
    if (spec.t_floor.has_value() && *spec.t_floor < t_min)
        throw RegimeError("grid requests t below t_min = " + std::to_string(t_min));

    std::vector<double> grid;
    grid.reserve(spec.total_points());
    // apex side ascending: t_min + (lambda - t_min) * 10^{-k/ppd}
    const double apex_span = lam - t_min;
    for (int k = spec.points_per_decade * spec.decades_to_apex; k >= 1; --k) {
        double tt = t_min + apex_span * std::pow(10.0, -double(k) / spec.points_per_decade);
        if (spec.t_floor.has_value() && tt < *spec.t_floor) continue;
        grid.push_back(tt);
    }
    grid.push_back(lam);
    // divisor side: alpha - (alpha - lambda) * 10^{-k/ppd}
    const double div_span = alpha - lam;
    for (int k = 1; k <= spec.points_per_decade * spec.decades_to_divisor; ++k)
        grid.push_back(alpha - div_span * std::pow(10.0, -double(k) / spec.points_per_decade));
    return grid;
}

}  // namespace detail

/// Solve the profile over the global moment-map parametrization.
/// psi(t) = mu^-1 log(F+C); phi by adaptive quadrature of t^n/(F+C) from the
/// apex anchor (resp. lambda for subcritical); u from the first integral.
inline ProfileSolution solve_profile(const DerivedConstants& c, const GridSpec& spec = {},
                                     Normalization norm = Normalization::Raw) {
    ProfileSolution sol;
    sol.consts = c;
    sol.regime = c.regime();
    sol.normalization = norm;

    if (norm == Normalization::A1Normalized && sol.regime == AngleRegime::Subcritical)
        throw RegimeError("A1 normalization undefined for subcritical profiles");

    const int n = c.geom.n;
    sol.t_min = (sol.regime == AngleRegime::Subcritical) ? subcritical_gamma(c) : 0.0;

    std::vector<double> grid = detail::build_t_grid(c, spec, sol.t_min);
    const std::size_t m = grid.size();

    // integrand of phi; the critical case simplifies to 1/(a (alpha - t))
    // (b = a alpha exactly there), which is also safe at both endpoints
    const double gam = (sol.regime == AngleRegime::Subcritical) ? sol.t_min : -1.0;
    const double alpha = c.alpha();
    auto g_phi = [&](double x) {
        if (c.C_beta == 0.0) return 1.0 / (c.a * (alpha - x));
        if (x <= 0.0) return 0.0;
        return std::pow(x, n) / detail::F_plus_C_stable(c, gam, x);
    };

    std::vector<double> phi_col(m);
    // anchor and cumulative panels
    double anchor_t, anchor_phi = 0.0;
    if (sol.regime == AngleRegime::Subcritical) {
        anchor_t = c.lambda;
    } else {
        anchor_t = 0.0;  // integral converges at the apex for C >= 0
    }
    // locate the grid index closest to the anchor side and accumulate outward
    // from the anchor: ascending grid; integrate panel by panel
    std::vector<double> cum(m, 0.0);
    // first node from the anchor
    double prev_t = anchor_t, prev_phi = anchor_phi;
    if (sol.regime == AngleRegime::Subcritical) {
        // anchor sits inside the grid; find lambda's index
        std::size_t k_lam = 0;
        for (std::size_t i = 0; i < m; ++i)
            if (grid[i] == c.lambda) k_lam = i;
        cum[k_lam] = 0.0;
        for (std::size_t i = k_lam; i-- > 0;)
            cum[i] = cum[i + 1] + integrate(g_phi, grid[i + 1], grid[i], 1e-12, 1e-16).value;
        for (std::size_t i = k_lam + 1; i < m; ++i)
            cum[i] = cum[i - 1] + integrate(g_phi, grid[i - 1], grid[i], 1e-12, 1e-16).value;
    } else {
        for (std::size_t i = 0; i < m; ++i) {
            cum[i] = prev_phi + integrate(g_phi, prev_t, grid[i], 1e-12, 1e-16).value;
            prev_t = grid[i];
            prev_phi = cum[i];
        }
    }
    phi_col = cum;

    // assemble columns in descending t (ascending u)
    sol.t.resize(m);
    sol.u.resize(m);
    sol.phi.resize(m);
    sol.psi.resize(m);
    sol.V.resize(m);

    // A1 shift: rho^2-coefficient a1 = b^{-(1+1/n)} maps to 1 under
    // u -> u + (1 + 1/n) log(b)/beta_*
    if (norm == Normalization::A1Normalized) {
        sol.u_shift = (1.0 + 1.0 / n) * std::log(c.b) / c.beta_star;
        sol.ma_scale = std::pow(c.b, n + 1);
    }

    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t j = m - 1 - i;  // reverse
        const double tt = grid[j];
        const double fc = detail::F_plus_C_stable(c, gam, tt);
        if (!(fc > 0.0))
            throw ConvergenceError("profile: F+C <= 0 inside grid (t=" + std::to_string(tt) + ")");
        const double psi_raw = std::log(fc) / c.mu;
        const double u_raw = (-phi_col[j] - psi_raw) / c.lambda;
        sol.t[i] = tt;
        sol.phi[i] = phi_col[j];
        sol.u[i] = u_raw + sol.u_shift;
        sol.psi[i] = -phi_col[j] - c.lambda * sol.u[i];
        sol.V[i] = fc / std::pow(tt, n - 1);
    }

    // near extinction the profile flattens in u; drop apex-side nodes whose
    // u-increment falls below resolution, then require strict monotonicity
    {
        std::size_t keep = 1;
        for (std::size_t i = 1; i < m; ++i) {
            const double du = sol.u[i] - sol.u[keep - 1];
            if (du > 1e-11 * std::max(1.0, std::fabs(sol.u[keep - 1]))) {
                if (keep != i) {
                    sol.t[keep] = sol.t[i];
                    sol.u[keep] = sol.u[i];
                    sol.phi[keep] = sol.phi[i];
                    sol.psi[keep] = sol.psi[i];
                    sol.V[keep] = sol.V[i];
                }
                ++keep;
            }
        }
        sol.t.resize(keep);
        sol.u.resize(keep);
        sol.phi.resize(keep);
        sol.psi.resize(keep);
        sol.V.resize(keep);
    }
    for (std::size_t i = 1; i < sol.u.size(); ++i)
        if (!(sol.u[i] > sol.u[i - 1]))
            throw ConvergenceError("profile: u(t) not strictly monotone");

    const double F_lam = c.F_at_lambda();
    sol.psi_nexus = std::log(F_lam + c.C_beta) / c.mu;
    // nexus u from the stored column (lambda is a grid node)
    for (std::size_t i = 0; i < sol.t.size(); ++i)
        if (sol.t[i] == c.lambda) sol.u_nexus = sol.u[i];

    if (sol.regime == AngleRegime::Supercritical)
        sol.u_extinct = -std::log(c.C_beta) / (c.mu * c.lambda) + sol.u_shift;

    return sol;
}

/// Extinction time by quadrature: u_beta = u(lambda) + int_0^lambda t^{n-1}/(F+C) dt,
/// raw gauge. Split at the apex layer width (C/b)^{1/n} where the integrand peaks.
inline double extinction_time(const DerivedConstants& c) {
    if (c.regime() != AngleRegime::Supercritical)
        throw RegimeError("extinction time defined only for beta > beta_*");
    const int n = c.geom.n;
    auto g = [&](double x) {
        if (x <= 0.0) return 0.0;
        return std::pow(x, n - 1) / c.F_plus_C(x);
    };
    const double layer = std::pow(c.C_beta / c.b, 1.0 / n);
    const double split = std::min(0.5 * c.lambda, layer);
    double tail = integrate(g, 0.0, split, 1e-12, 1e-16).value +
                  integrate(g, split, c.lambda, 1e-12, 1e-16).value;

    // u(lambda) in the raw gauge
    auto g_phi = [&](double x) {
        if (x <= 0.0) return 0.0;
        return std::pow(x, n) / c.F_plus_C(x);
    };
    const double phi_lam = integrate(g_phi, 0.0, split, 1e-12, 1e-16).value +
                           integrate(g_phi, split, c.lambda, 1e-12, 1e-16).value;
    const double psi_lam = std::log(c.F_at_lambda() + c.C_beta) / c.mu;
    const double u_lam = (-phi_lam - psi_lam) / c.lambda;
    return u_lam + tail;
}

/// psi''(u0) = -e^{mu psi0} / lambda^{n-1}: the nexus curvature, where psi
/// attains its maximum.
inline double nexus_second_derivative(const DerivedConstants& c) {
    const double psi0 = std::log(c.F_at_lambda() + c.C_beta) / c.mu;
    return -std::exp(c.mu * psi0) / std::pow(c.lambda, c.geom.n - 1);
}

// ---- critical closed family ---------------------------------------------

/// phi(u) = c0 - alpha u + (alpha/beta_*) log(1 + c1 e^{beta_* u}).
inline double critical_family_phi(const DerivedConstants& c, double c0, double c1, double uu) {
    const double al = c.alpha();
    // evaluate the log term stably on both ends
    const double z = c.beta_star * uu + std::log(c1);
    double logterm;
    if (z > 30.0)
        logterm = z + std::log1p(std::exp(-z));
    else
        logterm = std::log1p(std::exp(z));
    return c0 - al * uu + (al / c.beta_star) * logterm;
}

struct CriticalFamilyFit {
    double c0 = 0, c1 = 0;
};

/// Fit (c0, c1) of the closed critical family from two profile samples.
inline CriticalFamilyFit fit_critical_family(const ProfileSolution& sol, double u1, double u2) {
    if (sol.regime != AngleRegime::Critical)
        throw RegimeError("closed family fit requires the critical profile");
    const DerivedConstants& c = sol.consts;
    const double al = c.alpha();
    const double phi1 = sol.at_u(u1).phi, phi2 = sol.at_u(u2).phi;
    const double target = (phi1 - phi2) + al * (u1 - u2);
    auto gap = [&](double log_c1) {
        auto lt = [&](double uu) {
            const double z = c.beta_star * uu + log_c1;
            return (z > 30.0) ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        };
        return (al / c.beta_star) * (lt(u1) - lt(u2)) - target;
    };
    const double lc1 = brent(gap, -60.0, 60.0, 1e-15);
    CriticalFamilyFit fit;
    fit.c1 = std::exp(lc1);
    fit.c0 = phi1 + al * u1 - (al / c.beta_star) *
                                  ((c.beta_star * u1 + lc1 > 30.0)
                                       ? c.beta_star * u1 + lc1 +
                                             std::log1p(std::exp(-(c.beta_star * u1 + lc1)))
                                       : std::log1p(std::exp(c.beta_star * u1 + lc1)));
    return fit;
}

/// Sup residual of the A1 critical profile against log(1 + rho^2), after the
/// curvature-normalizing map Phi = (beta_*/alpha) phi at rho_hat^2 =
/// (beta_*/alpha) rho^2. In this normalization the critical solution is the
/// Fubini-Study-type potential exactly.
inline double critical_fs_sup_residual(const ProfileSolution& sol, double rho_hat_lo,
                                       double rho_hat_hi, int samples = 200) {
    if (sol.regime != AngleRegime::Critical || sol.normalization != Normalization::A1Normalized)
        throw RegimeError("FS-form check requires the A1-normalized critical profile");
    const DerivedConstants& c = sol.consts;
    const double k = c.beta_star / c.alpha();
    double worst = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double rh =
            rho_hat_lo * std::pow(rho_hat_hi / rho_hat_lo, double(i) / (samples - 1));
        const double rho2 = rh * rh / k;
        const double uu = -std::log(rho2) / c.beta_star;
        const double Phi = k * sol.at_u(uu).phi;
        worst = std::max(worst, std::fabs(Phi - std::log1p(rh * rh)));
    }
    return worst;
}

}  // namespace calabi
