#pragma once

#include <cmath>
#include <optional>

#include "calabi/asymptotics.hpp"
#include "calabi/errors.hpp"
#include "calabi/gluing.hpp"
#include "calabi/params.hpp"
#include "calabi/profile.hpp"
#include "calabi/quadrature.hpp"

namespace calabi {

/// Divisor-fiber data collapsed to multiplicative constants: the fiber
/// integral of |phi_{j0}|^2 (c_phi), the Green's-term coefficient of the
/// complete Ricci-flat model (a_TY), and the boundary-measure constant of
/// the gluing-zone integral with the fiber volume normalized to 1.
struct ModelInputs {
    double c_phi = 1.0;
    double a_TY = 1.0;
    double kappa_I2 = 0.0;
    bool strict_positivity = true;  // enforce a_TY > 0, the solvable-sign hypothesis

    static ModelInputs make(const DerivedConstants& c) {
        ModelInputs m;
        m.kappa_I2 = (2.0 * c.geom.n - 2.0) * c.lambda;
        return m;
    }

    void validate() const {
        if (c_phi < 0.0) throw DomainError("c_phi must be nonnegative");
        if (strict_positivity && !(a_TY > 0.0))
            throw DomainError("strict positivity requires a_TY > 0");
    }
};

struct I2Parts {
    double total = 0;
    double tail_part = 0;   // from the Ricci-flat model's Green tail
    double green_part = 0;  // from the profile difference (linear in beta-beta_*)
    double tau = 0;         // the radial eigenfunction value at the boundary
};

struct ObstructionReport {
    Nu0Regime regime = Nu0Regime::Greater;
    double nu0 = 0;
    double beta = 0, d = 0;
    double theta = 0, eta = 0;
    double eps_beta = 0, epsilon = 0;
    double matched_kappa_ratio = 0;

    double J_value = 0;
    double J_ibp = 0;
    double I_normal = 0;  // eps^{nu0} c_phi J
    I2Parts I2;
    double A_total = 0;

    double a_beta = 0;       // Less: limit constant of J
    double aprime_beta = 0;  // Equal: slope of J in the cut
    double kappa_fit = 0;    // normal-form slope of A/(d eta)
    std::optional<double> eta_root;
    double F = 0, E = 0;
};

namespace detail {

/// J = int_{-inf}^{u_cut} e^{beta_*(nu0-n) u} (phi' + lambda) ms e^{-mu phi} du
/// (ms = the gauge factor of the Monge-Ampere right side), evaluated over the
/// moment-map parametrization. ibp_form swaps in the integrated-by-parts
/// expression; the two agree identically.
inline double J_core(const ProfileSolution& sol, double nu0, double u_cut, bool ibp_form) {
    const DerivedConstants& c = sol.consts;
    const int n = c.geom.n;
    const double bs = c.beta_star;
    const double ms = sol.ma_scale;
    if (!(u_cut > sol.u_front() + 1.0)) throw RangeError("J: cut too deep");

    auto base = [&](double uu, const ProfileSample& s) {
        return std::exp(bs * (nu0 - n) * uu - c.mu * s.phi);
    };

    // divisor side in x with t = alpha - (alpha - lambda) e^{-x}; stay on the
    // solved grid (the tail beyond decays like e^{-(beta_* nu0 + beta) u})
    const double al = c.alpha();
    const double span = al - c.lambda;
    const double rate = (bs * std::min(nu0, 60.0) + c.beta) / c.beta;
    const double X_grid = -std::log((al - sol.t.front()) / span) - 0.05;
    const double X_max = std::min(45.0 / std::min(rate, 45.0) + 45.0, X_grid);
    auto g_div = [&](double x) {
        const double tt = al - span * std::exp(-x);
        if (!(tt < al)) return 0.0;
        auto s = sol.at_t(tt);
        const double jac = std::pow(tt, n - 1) / sol.fc(tt) * span * std::exp(-x);
        const double f = ibp_form ? base(s.u, s) : base(s.u, s) * (c.lambda - tt);
        return f * jac;
    };

    const double t_cut = sol.at_u(u_cut).t;
    double J = integrate(g_div, 0.0, X_max, 1e-10, 1e-14).value;
    if (t_cut < c.lambda) {
        auto g_apex = [&](double tt) {
            auto s = sol.at_t(tt);
            const double jac = std::pow(tt, n - 1) / sol.fc(tt);
            const double f = ibp_form ? base(s.u, s) : base(s.u, s) * (c.lambda - tt);
            return f * jac;
        };
        J += integrate(g_apex, t_cut, c.lambda, 1e-10, 1e-14).value;
    }
    return J * ms;
}

}  // namespace detail

/// J in the direct form.
inline double J_integral(const ProfileSolution& sol, double nu0, double u_cut) {
    return detail::J_core(sol, nu0, u_cut, false);
}

/// J in the integration-by-parts form:
/// (beta_* nu0 / mu) int e^{beta_*(nu0-n)u - mu phi} du - boundary term.
inline double J_integral_ibp(const ProfileSolution& sol, double nu0, double u_cut) {
    const DerivedConstants& c = sol.consts;
    const double bs = c.beta_star;
    const double I = detail::J_core(sol, nu0, u_cut, true);
    auto s_cut = sol.at_u(u_cut);
    const double boundary =
        sol.ma_scale * std::exp(bs * (nu0 - c.geom.n) * u_cut - c.mu * s_cut.phi) / c.mu;
    return (bs * nu0 / c.mu) * I - boundary;
}

/// Boundary integral of the model gap at r = r_eps/2 with unit fiber volume:
/// I2 = -d/dr[(phi_crit + a_TY T) - phi_beta^aligned] * tau * r^{2n-1}.
inline I2Parts gap_and_I2(const ProfileSolution& sol_beta, const ProfileSolution& sol_crit,
                          const GluingPlan& plan, const ModelInputs& inputs, double c_align) {
    inputs.validate();
    const DerivedConstants& c = sol_beta.consts;
    const int n = c.geom.n;
    const double bs = c.beta_star;
    const double r = 0.5 * plan.r_eps;
    const double rho = 0.5 * r;
    const double uu = -2.0 * std::log(rho) / bs;
    if (uu + std::fabs(c_align) > std::min(sol_beta.u_back(), sol_crit.u_back()) - 1e-6)
        throw WindowError("gap boundary lies beyond the profile domain (widen the margins)");

    // aligned profile: phi_al(u) = phi_beta(u + c_align) + lambda c_align
    const double t_beta = sol_beta.at_u(uu + c_align).t;
    const double t_crit = sol_crit.at_u(uu).t;

    I2Parts out;
    out.tau = c.lambda - t_beta;

    // d(phi_beta - phi_crit)/dr at matched u; dphi/dr = 2 t / (beta_* r)
    const double dDelta_dr = 2.0 * (t_beta - t_crit) / (bs * r);

    // Green tail derivative of the Ricci-flat model
    const double eps = plan.epsilon;
    double Tprime = 0.0;
    switch (plan.regime) {
        case Nu0Regime::Less:
            Tprime = -(2.0 * plan.nu0 - 2.0) * std::pow(eps, plan.nu0) /
                     std::pow(r, 2.0 * plan.nu0 - 1.0);
            break;
        case Nu0Regime::Equal:
            Tprime = std::pow(eps, n) *
                     (1.0 - (2.0 * n - 2.0) * std::log(r / std::sqrt(eps))) /
                     std::pow(r, 2 * n - 1);
            break;
        case Nu0Regime::Greater:
            Tprime = -(2.0 * n - 2.0) * std::pow(eps, n) / std::pow(r, 2 * n - 1);
            break;
    }

    const double measure = std::pow(r, 2 * n - 1);
    out.tail_part = -inputs.a_TY * Tprime * out.tau * measure;
    out.green_part = dDelta_dr * out.tau * measure;
    out.total = out.tail_part + out.green_part;
    return out;
}

/// The assembled one-dimensional obstruction model. Construction solves the
/// two profiles, aligns their gauges, and calibrates the matched kappa-ratio
/// of the scaling law; A(eta) then evaluates the obstruction at
/// eps = eps_beta (1 + eta).
class ObstructionModel {
  public:
    /// kappa_ratio_override > 0 replaces the internally calibrated scaling
    /// ratio (used to probe miscalibration).
    ObstructionModel(const GeometryParams& geom, double beta, double theta,
                     const ModelInputs& inputs, double margin = 10.0,
                     double kappa_ratio_override = -1.0)
        : ObstructionModel(derive(geom, beta), theta, inputs, margin, kappa_ratio_override) {}

    /// Exact-rational entry point: regime classification stays exact for
    /// separations below the double tolerance.
    ObstructionModel(const DerivedConstants& consts, double theta, const ModelInputs& inputs,
                     double margin = 10.0, double kappa_ratio_override = -1.0)
        : geom_(consts.geom), inputs_(inputs), theta_(theta), margin_(margin) {
        inputs_.validate();
        consts_ = consts;
        if (consts_.regime() != AngleRegime::Supercritical)
            throw RegimeError("obstruction model requires beta > beta_*");
        regime_ = classify(geom_);
        nu0_ = consts_.nu0;
        d_ = consts_.beta - consts_.beta_star;

        auto crit_consts = derive(geom_, consts_.beta_star_q);
        sol_beta_ = solve_profile(consts_, {}, Normalization::A1Normalized);
        sol_crit_ = solve_profile(crit_consts, {}, Normalization::A1Normalized);

        auto rep = fit_expansion(sol_beta_, sol_crit_, 4);
        c_align_ = rep.gauge_offset;
        // Green coefficient in r-units (phi ~ a_L d / rho^{2n-2}, rho = r/2)
        a_L_r_ = rep.a_L * std::pow(2.0, 2 * consts_.geom.n - 2);

        calibrate();
        if (kappa_ratio_override > 0.0) kappa_ratio_ = kappa_ratio_override;
    }

    const DerivedConstants& consts() const { return consts_; }
    Nu0Regime regime() const { return regime_; }
    double matched_ratio() const { return kappa_ratio_; }
    double alignment() const { return c_align_; }
    double a_L_r() const { return a_L_r_; }
    const ProfileSolution& profile() const { return sol_beta_; }
    const ProfileSolution& critical_profile() const { return sol_crit_; }

    GluingPlan plan(double eta) const {
        return make_plan(consts_, theta_, eta, margin_, kappa_ratio_);
    }

    double u_cut(const GluingPlan& p) const {
        // inner zone ends at rho = 2 r_eps, i.e. rho-coordinate r_eps
        return -2.0 * std::log(p.r_eps) / consts_.beta_star;
    }

    double A(double eta) const {
        auto p = plan(eta);
        double J = 0.0, In = 0.0;
        if (std::isfinite(nu0_) && inputs_.c_phi > 0.0) {
            J = J_integral(sol_beta_, nu0_, u_cut(p));
            In = std::pow(p.epsilon, nu0_) * inputs_.c_phi * J;
        }
        auto i2 = gap_and_I2(sol_beta_, sol_crit_, p, inputs_, c_align_);
        return In + i2.total;
    }

    ObstructionReport report(double eta) const {
        ObstructionReport rep;
        rep.regime = regime_;
        rep.nu0 = nu0_;
        rep.beta = consts_.beta;
        rep.d = d_;
        rep.theta = theta_;
        rep.eta = eta;
        rep.matched_kappa_ratio = kappa_ratio_;
        auto p = plan(eta);
        rep.eps_beta = p.eps_beta;
        rep.epsilon = p.epsilon;
        rep.E = p.E;
        rep.F = p.F;
        const double cut = u_cut(p);
        if (std::isfinite(nu0_)) {
            rep.J_value = J_integral(sol_beta_, nu0_, cut);
            rep.J_ibp = J_integral_ibp(sol_beta_, nu0_, cut);
            rep.I_normal = std::pow(p.epsilon, nu0_) * inputs_.c_phi * rep.J_value;
        }
        rep.I2 = gap_and_I2(sol_beta_, sol_crit_, p, inputs_, c_align_);
        rep.A_total = (inputs_.c_phi > 0.0 ? rep.I_normal : 0.0) + rep.I2.total;
        rep.a_beta = a_beta_;
        rep.aprime_beta = aprime_beta_;

        // fitted normal-form slope kappa of A = d (kappa eta + ...)
        const double e1 = std::min(p.F, 0.01);
        rep.kappa_fit = (A(e1) - A(-e1)) / (2.0 * e1 * d_);
        return rep;
    }

    /// Bisection root of A(eta); throws NoSignChangeError when A keeps one
    /// sign on the bracket.
    double find_root(double bracket_halfwidth = -1.0, double value_tol_factor = 1e-3) const {
        if (inputs_.strict_positivity && !(inputs_.a_TY > 0.0) &&
            !(regime_ == Nu0Regime::Less && inputs_.c_phi > 0.0))
            throw DomainError("find_root: no positive source (need a_TY > 0 or an interior density)");
        GluingPlan p0 = plan(0.0);
        double eta_max = bracket_halfwidth > 0.0 ? bracket_halfwidth
                                                 : std::min(10.0 * p0.F, 0.45);
        eta_max = std::min(eta_max, 0.45);
        double lo = -eta_max, hi = eta_max;
        double Alo = A(lo), Ahi = A(hi);
        if (Alo == 0.0) return lo;
        if (Ahi == 0.0) return hi;
        if ((Alo < 0) == (Ahi < 0))
            throw NoSignChangeError("A keeps sign " + std::string(Alo < 0 ? "-" : "+") +
                                    " on |eta| <= " + std::to_string(eta_max));
        const double tol = value_tol_factor * d_;
        double mid = 0.0, Amid = A(0.0);
        for (int i = 0; i < 120 && std::fabs(Amid) > tol; ++i) {
            if ((Amid < 0) == (Alo < 0)) {
                lo = mid;
                Alo = Amid;
            } else {
                hi = mid;
            }
            mid = 0.5 * (lo + hi);
            Amid = A(mid);
        }
        if (std::fabs(Amid) > tol)
            throw ConvergenceError("find_root: |A| did not reach the tolerance");
        return mid;
    }

  private:
    void calibrate() {
        const int n = consts_.geom.n;
        const double lam = consts_.lambda;
        const double kappa_green = (2.0 * n - 2.0) * lam * a_L_r_;
        switch (regime_) {
            case Nu0Regime::Greater:
                kappa_ratio_ = (inputs_.a_TY > 0.0)
                                   ? (2.0 * n - 2.0) * lam * inputs_.a_TY / kappa_green
                                   : 1.0;
                break;
            case Nu0Regime::Less: {
                // J converges; evaluate at a cut as deep as the profile allows
                const double ucut = std::min(-2.0 * std::log(2e-2) / consts_.beta_star,
                                             sol_beta_.u_back() - 0.5);
                a_beta_ = J_integral(sol_beta_, nu0_, ucut);
                const double k1 = inputs_.c_phi * a_beta_;
                kappa_ratio_ = (k1 > 0.0) ? k1 / kappa_green : 1.0;
                break;
            }
            case Nu0Regime::Equal: {
                // J ~ a'_beta u_cut: slope between two cuts
                const double u2 = std::min(-2.0 * std::log(1e-2) / consts_.beta_star,
                                           sol_beta_.u_back() - 1.5);
                const double u1 = std::max(u2 - 4.0, sol_beta_.u_nexus + 1.0);
                const double J1 = J_integral(sol_beta_, nu0_, u1);
                const double J2 = J_integral(sol_beta_, nu0_, u2);
                aprime_beta_ = (J2 - J1) / (u2 - u1);
                // positive contribution eps^n [c_phi a' (1-theta)/beta_* +
                // (2n-2) lam a_TY theta/2] log(1/eps)
                const double k3 = inputs_.c_phi * aprime_beta_ * (1.0 - theta_) / consts_.beta_star +
                                  (2.0 * n - 2.0) * lam * std::max(inputs_.a_TY, 0.0) * 0.5 * theta_;
                kappa_ratio_ = (k3 > 0.0) ? k3 / kappa_green : 1.0;
                break;
            }
        }
    }

    GeometryParams geom_;
    ModelInputs inputs_;
    double theta_;
    double margin_;
    DerivedConstants consts_;
    Nu0Regime regime_ = Nu0Regime::Greater;
    double nu0_ = 0, d_ = 0;
    ProfileSolution sol_beta_, sol_crit_;
    double c_align_ = 0;
    double a_L_r_ = 0;
    double kappa_ratio_ = 1.0;
    double a_beta_ = 0, aprime_beta_ = 0;
};

inline ObstructionReport model_obstruction(const GeometryParams& geom, double beta, double theta,
                                           double eta, const ModelInputs& inputs) {
    ObstructionModel model(geom, beta, theta, inputs);
    return model.report(eta);
}

inline double find_sign_change(const GeometryParams& geom, double beta, double theta,
                               const ModelInputs& inputs, double bracket_halfwidth = -1.0) {
    ObstructionModel model(geom, beta, theta, inputs);
    return model.find_root(bracket_halfwidth);
}

}  // namespace calabi
