#pragma once

#include <cmath>
#include <string>

#include "calabi/errors.hpp"
#include "calabi/params.hpp"
#include "calabi/profile.hpp"
#include "calabi/roots.hpp"

namespace calabi {

enum class Nu0Regime { Less, Equal, Greater };

inline const char* to_string(Nu0Regime r) {
    switch (r) {
        case Nu0Regime::Less: return "nu0<n";
        case Nu0Regime::Equal: return "nu0=n";
        case Nu0Regime::Greater: return "nu0>n";
    }
    return "?";
}

/// nu0 = j0/beta_* versus n, decided by the exact rational comparison
/// j0 vs alpha - 1 (the two criteria agree identically).
inline Nu0Regime classify(const GeometryParams& geom) {
    geom.validate();
    if (geom.j0_infinite()) return Nu0Regime::Greater;
    const Rational am1 = geom.alpha - Rational(1);
    const Rational j0q(*geom.j0);
    if (j0q < am1) return Nu0Regime::Less;
    if (j0q == am1) return Nu0Regime::Equal;
    return Nu0Regime::Greater;
}

/// The scaling-parameter law: solves beta - beta_* = kappa * eps^{nu0}
/// (Less), kappa * eps^n log(1/eps) (Equal, safeguarded Newton on the
/// monotone branch eps < 1/e), kappa * eps^n (Greater).
inline double epsilon_beta(const GeometryParams& geom, double beta, double kappa_ratio = 1.0) {
    geom.validate();
    if (!(kappa_ratio > 0.0)) throw DomainError("epsilon_beta: kappa_ratio must be positive");
    const double beta_star = (geom.alpha.value() - 1.0) / geom.n;
    const double d = beta - beta_star;
    if (!(d > 0.0)) throw RegimeError("epsilon_beta defined for beta > beta_* only");
    const double x = d / kappa_ratio;
    switch (classify(geom)) {
        case Nu0Regime::Less: {
            const double nu0 = geom.n * static_cast<double>(*geom.j0) /
                               (geom.alpha.value() - 1.0);
            return std::pow(x, 1.0 / nu0);
        }
        case Nu0Regime::Greater:
            return std::pow(x, 1.0 / geom.n);
        case Nu0Regime::Equal: {
            // g(eps) = eps^n log(1/eps), increasing on (0, e^{-1/n}); restrict
            // to eps <= 1/e
            const int n = geom.n;
            const double cap = std::exp(-1.0);
            if (x > std::pow(cap, n))
                throw NoRootError("epsilon_beta: beta - beta_* above the monotone branch");
            auto f = [&](double e) { return std::pow(e, n) * std::log(1.0 / e) - x; };
            auto df = [&](double e) {
                return std::pow(e, n - 1) * (n * std::log(1.0 / e) - 1.0);
            };
            return newton_bisect(f, df, 1e-300, cap, 1e-15);
        }
    }
    throw Error("unreachable");
}

/// Gluing-scale plan: the scales, zone boundaries, and the error magnitudes
/// E and F for the chosen (theta, eta).
struct GluingPlan {
    int n = 2;
    double beta = 0, beta_star = 0, d = 0;
    double nu0 = 0;
    Nu0Regime regime = Nu0Regime::Greater;

    double eps_beta = 0, eta = 0, epsilon = 0;
    double theta = 0, sigma = 0;
    double r_eps = 0, u_eps = 0;
    double rho_inner = 0, rho_outer = 0;  // gluing zone [r_eps/2, 2 r_eps]
    double rho_min = 0, rho_max = 0;      // global range [sqrt(eps), 2 sqrt(alpha/beta_*)]
    double E = 0, F = 0;
    double delta_r_eps = 0;  // error envelope r_eps^2 + (beta-beta_*)/r_eps^{2n}
    double margin_lo = 0, margin_hi = 0;  // window ratios, both >= margin
};

inline GluingPlan make_plan(const DerivedConstants& c, double theta, double eta,
                            double margin = 10.0, double kappa_ratio = 1.0,
                            double sigma = -1.0) {
    const GeometryParams& geom = c.geom;
    const double beta = c.beta;
    if (c.regime() != AngleRegime::Supercritical)
        throw RegimeError("make_plan: supercritical beta required");
    if (!(theta > 0.0 && theta < 1.0)) throw ThetaError("theta must lie in (0,1)");
    if (!(std::fabs(eta) < 0.5)) throw DomainError("|eta| must be < 0.5");

    GluingPlan p;
    p.n = geom.n;
    p.beta = beta;
    p.beta_star = c.beta_star;
    p.d = beta - c.beta_star;
    p.nu0 = c.nu0;
    p.regime = classify(geom);

    // regime-dependent lower bounds on theta
    if (p.regime == Nu0Regime::Less) {
        const double bound = 1.0 - (p.nu0 - 1.0) / geom.n;
        if (!(theta > bound))
            throw ThetaError("theta must exceed 1 - (nu0-1)/n = " + std::to_string(bound));
    } else if (p.regime == Nu0Regime::Greater) {
        const double bound = 1.0 / (geom.n + 1);
        if (!(theta > bound))
            throw ThetaError("theta must exceed 1/(n+1) = " + std::to_string(bound));
    }

    p.theta = theta;
    p.eta = eta;
    p.eps_beta = epsilon_beta(geom, beta, kappa_ratio);
    p.epsilon = p.eps_beta * (1.0 + eta);
    p.r_eps = std::pow(p.epsilon, 0.5 * (1.0 - theta));
    p.u_eps = -2.0 * std::log(0.5 * p.r_eps) / c.beta_star;
    p.rho_inner = 0.5 * p.r_eps;
    p.rho_outer = 2.0 * p.r_eps;
    p.rho_min = std::sqrt(p.epsilon);
    p.rho_max = 2.0 * std::sqrt(c.alpha() / c.beta_star);

    // window (beta-beta_*)^{1/n} << r_eps^2 << 1 with the operational margin.
    // The lower scale carries its gauge constant: the profile ends at the
    // extinction radius r_ext^2 = 4 a1 C_beta^{1/n} (A1 units), so that is
    // what r_eps^2 must clear.
    const double a1 = std::pow(c.beta_star, -(1.0 + 1.0 / geom.n));
    const double r_ext2 = 4.0 * a1 * std::pow(c.C_beta, 1.0 / geom.n);
    p.margin_lo = p.r_eps * p.r_eps / r_ext2;
    p.margin_hi = 1.0 / (p.r_eps * p.r_eps);
    if (!(p.margin_lo >= margin))
        throw WindowError("gluing window: r_eps^2 vs (beta-beta_*)^{1/n} margin " +
                          std::to_string(p.margin_lo) + " < " + std::to_string(margin));
    if (!(p.margin_hi >= margin))
        throw WindowError("gluing window: 1 vs r_eps^2 margin " + std::to_string(p.margin_hi) +
                          " < " + std::to_string(margin));

    p.delta_r_eps = p.r_eps * p.r_eps + p.d / std::pow(p.r_eps, 2 * geom.n);

    // sigma of the Greater-regime error law; must stay below 1 - theta
    if (sigma > 0.0) {
        p.sigma = sigma;
    } else if (p.regime == Nu0Regime::Greater) {
        const double cand = std::isinf(p.nu0)
                                ? (1.0 - theta)
                                : (p.nu0 - geom.n) * c.beta_star * theta;
        p.sigma = 0.5 * std::min(1.0 - theta, cand);
    } else {
        p.sigma = 0.5 * (1.0 - theta);
    }

    const double eps = p.epsilon;
    switch (p.regime) {
        case Nu0Regime::Less:
            p.E = std::pow(eps, p.nu0 - geom.n * (1.0 - theta));
            p.F = std::pow(p.eps_beta, (1.0 - theta) * std::min(1.0, geom.n - p.nu0));
            break;
        case Nu0Regime::Equal:
            p.E = std::pow(eps, geom.n * theta) * std::log(1.0 / eps);
            p.F = 1.0 / std::log(1.0 / p.eps_beta);
            break;
        case Nu0Regime::Greater:
            p.E = std::pow(eps, geom.n * theta);
            p.F = std::pow(p.eps_beta, p.sigma);
            break;
    }
    return p;
}

/// Weight function rho in the normal-bundle coordinate u (the X-side
/// coordinate is u + beta_*^{-1} log eps): the profile's moment map on the
/// inner zone u <= u_eps, the cone radius r^2 = 4 e^{-beta_* u} on the
/// Tian-Yau side, floored at sqrt(eps). The profile must be the
/// A1-normalized supercritical solution at the plan's angle (leading
/// coefficient 1 makes the two branches match at u_eps).
inline double weight_rho(const GluingPlan& plan, const ProfileSolution& sol, double u) {
    if (sol.regime != AngleRegime::Supercritical ||
        sol.normalization != Normalization::A1Normalized)
        throw DomainError("weight_rho: A1-normalized supercritical profile required");
    if (std::fabs(sol.consts.beta - plan.beta) > 1e-12)
        throw DomainError("weight_rho: profile angle does not match the plan");
    const double bs = sol.consts.beta_star;
    double rho2;
    if (u <= plan.u_eps) {
        rho2 = (4.0 / bs) * sol.at_u(u).t;
    } else {
        rho2 = 4.0 * std::exp(-bs * u);
    }
    return std::max(std::sqrt(rho2), plan.rho_min);
}

inline GluingPlan make_plan(const GeometryParams& geom, double beta, double theta, double eta,
                            double margin = 10.0, double kappa_ratio = 1.0,
                            double sigma = -1.0) {
    return make_plan(derive(geom, beta), theta, eta, margin, kappa_ratio, sigma);
}

/// C^2 cutoff chi(rho/r_eps): 0 on [0, 1/2], 1 on [2, inf), quintic
/// smoothstep in log scale between.
inline double cutoff_chi(const GluingPlan& plan, double rho) {
    if (!(rho >= 0.0)) throw RangeError("cutoff_chi: rho must be nonnegative");
    const double x = rho / plan.r_eps;
    if (x <= 0.5) return 0.0;
    if (x >= 2.0) return 1.0;
    const double s = std::log(2.0 * x) / (2.0 * std::log(2.0));
    return ((6.0 * s - 15.0) * s + 10.0) * s * s * s;
}

}  // namespace calabi
