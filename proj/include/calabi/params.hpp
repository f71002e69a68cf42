#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "calabi/errors.hpp"
#include "calabi/rational.hpp"

namespace calabi {

enum class AngleRegime { Subcritical, Critical, Supercritical };

inline const char* to_string(AngleRegime r) {
    switch (r) {
        case AngleRegime::Subcritical: return "subcritical";
        case AngleRegime::Critical: return "critical";
        case AngleRegime::Supercritical: return "supercritical";
    }
    return "?";
}

/// Geometric inputs: complex dimension n, the proportionality factor alpha
/// (exact rational), and the formal-neighborhood agreement order j0
/// (nullopt encodes +infinity).
struct GeometryParams {
    int n = 2;
    Rational alpha = Rational(3, 2);
    std::optional<long long> j0 = 1;

    bool j0_infinite() const { return !j0.has_value(); }

    void validate() const {
        if (n < 2) throw DomainError("n must be >= 2, got " + std::to_string(n));
        if (!(alpha > Rational(1)))
            throw DomainError("alpha must be > 1, got " + alpha.str());
        if (!(alpha < Rational(n + 1)))
            throw DomainError("alpha must be < n+1 = " + std::to_string(n + 1) + ", got " +
                              alpha.str());
        if (j0.has_value() && *j0 < 1)
            throw DomainError("j0 must be >= 1, got " + std::to_string(*j0));
    }
};

/// The exact constant table derived from (n, alpha, beta).
/// All entries are rationals when beta is rational; regime classification
/// and the nu0-vs-n comparison are exact in that case.
struct DerivedConstants {
    GeometryParams geom;

    // beta may arrive as an exact rational (config/CLI) or a double (sweeps)
    std::optional<Rational> beta_q;
    double beta = 0.0;

    Rational beta_star_q{0};
    std::optional<Rational> mu_q, lambda_q, a_q, C_beta_q;

    double beta_star = 0, mu = 0, lambda = 0, a = 0, b = 0, C_beta = 0;
    double b_minus_a_alpha = 0;  // = (beta_star - beta)/(n+1), kept exact-form
    double a_n_alpha = 0, b_n_alpha = 0;
    double nu0 = 0;  // +inf when j0 is infinite

    double alpha() const { return geom.alpha.value(); }
    int n() const { return geom.n; }

    bool beta_exact() const { return beta_q.has_value(); }

    AngleRegime regime() const {
        if (beta_exact()) {
            if (*beta_q == beta_star_q) return AngleRegime::Critical;
            return (*beta_q < beta_star_q) ? AngleRegime::Subcritical : AngleRegime::Supercritical;
        }
        const double tol = 1e-14;
        if (std::fabs(beta - beta_star) <= tol * std::max(1.0, std::fabs(beta_star)))
            return AngleRegime::Critical;
        return beta < beta_star ? AngleRegime::Subcritical : AngleRegime::Supercritical;
    }

    /// Structure function F(t) = t^n (b - a t) and friends; the profile
    /// module builds everything on these.
    double F(double t) const { return std::pow(t, geom.n) * (b - a * t); }
    double dF(double t) const { return mu * std::pow(t, geom.n - 1) * (lambda - t); }
    double F_at_lambda() const { return beta_star * std::pow(lambda, geom.n) / (geom.n + 1); }

    /// F(t) + C_beta in a factored form that is exact at both endpoints:
    /// F(t)+C = (t - alpha) * [ (b - a*alpha) * sum_{i<n} t^i alpha^{n-1-i} - a t^n ].
    /// Avoids the catastrophic cancellation of F(t) - F(alpha) near t = alpha
    /// and of (b - a t) near the apex in the critical case.
    double F_plus_C(double t) const {
        const double al = alpha();
        double s = 0.0, tp = 1.0;
        for (int i = 0; i < geom.n; ++i) {
            s += tp * std::pow(al, geom.n - 1 - i);
            tp *= t;
        }
        return (t - al) * (b_minus_a_alpha * s - a * tp);
    }
};

inline DerivedConstants derive(const GeometryParams& geom, const Rational& beta) {
    geom.validate();
    if (!(beta > Rational(0) && beta < Rational(1)))
        throw DomainError("beta must lie in (0,1), got " + beta.str());

    DerivedConstants c;
    c.geom = geom;
    c.beta_q = beta;
    c.beta = beta.value();

    const Rational alpha = geom.alpha;
    const int n = geom.n;
    c.beta_star_q = (alpha - Rational(1)) / Rational(n);
    const Rational mu = (alpha + beta - Rational(1)) / alpha;
    const Rational lambda = (alpha - Rational(1)) / mu;
    const Rational a = mu / Rational(n + 1);
    const Rational C = alpha.pow(n) * (beta - c.beta_star_q) / Rational(n + 1);
    c.mu_q = mu;
    c.lambda_q = lambda;
    c.a_q = a;
    c.C_beta_q = C;

    c.beta_star = c.beta_star_q.value();
    c.mu = mu.value();
    c.lambda = lambda.value();
    c.a = a.value();
    c.b = c.beta_star;
    c.C_beta = C.value();
    c.b_minus_a_alpha = ((c.beta_star_q - beta) / Rational(n + 1)).value();
    c.a_n_alpha = std::pow(2.0, n - 1) * n / std::pow(alpha.value() - 1.0, n - 1);
    c.b_n_alpha = std::pow(c.beta_star, n + 1) * c.a_n_alpha;
    if (geom.j0_infinite())
        c.nu0 = std::numeric_limits<double>::infinity();
    else
        c.nu0 = static_cast<double>(*geom.j0) / c.beta_star;
    return c;
}

/// Double-beta overload for parameter sweeps; the constant table is computed
/// at machine precision and regime comparisons fall back to tolerance 1e-14.
inline DerivedConstants derive(const GeometryParams& geom, double beta) {
    geom.validate();
    if (!(beta > 0.0 && beta < 1.0))
        throw DomainError("beta must lie in (0,1), got " + std::to_string(beta));

    DerivedConstants c;
    c.geom = geom;
    c.beta = beta;

    const double alpha = geom.alpha.value();
    const int n = geom.n;
    c.beta_star_q = (geom.alpha - Rational(1)) / Rational(n);
    c.beta_star = c.beta_star_q.value();
    c.mu = (alpha + beta - 1.0) / alpha;
    c.lambda = (alpha - 1.0) / c.mu;
    c.a = c.mu / (n + 1);
    c.b = c.beta_star;
    c.C_beta = std::pow(alpha, n) / (n + 1) * (beta - c.beta_star);
    c.b_minus_a_alpha = (c.beta_star - beta) / (n + 1);
    c.a_n_alpha = std::pow(2.0, n - 1) * n / std::pow(alpha - 1.0, n - 1);
    c.b_n_alpha = std::pow(c.beta_star, n + 1) * c.a_n_alpha;
    if (geom.j0_infinite())
        c.nu0 = std::numeric_limits<double>::infinity();
    else
        c.nu0 = static_cast<double>(*geom.j0) / c.beta_star;
    return c;
}

}  // namespace calabi
