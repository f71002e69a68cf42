#include <doctest.h>

#include <cmath>

#include "calabi/metric.hpp"
#include "calabi/params.hpp"
#include "calabi/profile.hpp"

using namespace calabi;

namespace {
GeometryParams geom_n2() { return {2, Rational(3, 2), 1}; }
}  // namespace

TEST_CASE("potential V: factored and unfactored forms agree") {
    auto c = derive(geom_n2(), Rational(3, 10));
    for (double s : {0.05, 0.2, 0.5, 0.9, 1.3}) {
        const double vf = potential_V(c, s);
        const double vu = potential_V_unfactored(c, s);
        CHECK(std::fabs(vf - vu) <= 1e-12 * std::fabs(vu));
    }
    // critical: V = s beta_* (1 - s/alpha)
    auto cc = derive(geom_n2(), Rational(1, 4));
    for (double s : {0.1, 0.7, 1.2})
        CHECK(potential_V(cc, s) ==
              doctest::Approx(s * cc.beta_star * (1.0 - s / cc.alpha())).epsilon(1e-14));
    // V matches phi'' along the profile at matched t = s
    auto sol = solve_profile(c);
    for (double uu : {-5.0, 0.0, 3.0}) {
        auto smp = sol.at_u(uu);
        CHECK(potential_V(c, smp.t) == doctest::Approx(smp.V).epsilon(1e-10));
    }
    CHECK_THROWS_AS(potential_V(c, 0.0), DomainError);
    CHECK_THROWS_AS(potential_V(c, c.alpha()), DomainError);
}

TEST_CASE("cone angle along the divisor is 2 pi beta in every regime") {
    for (auto beta : {Rational(1, 10), Rational(1, 4), Rational(3, 10)}) {
        auto c = derive(geom_n2(), beta);
        const double angle = cone_angle_at_D(c);
        CHECK(angle / (2.0 * M_PI * c.beta) == doctest::Approx(1.0).epsilon(1e-6));
    }
    // analytic slope: -V'(alpha) = beta via the difference quotient
    auto c = derive(geom_n2(), Rational(3, 10));
    const double h = 1e-7;
    const double slope = potential_V(c, c.alpha() - h) / h;
    CHECK(slope == doctest::Approx(c.beta).epsilon(1e-6));
}

TEST_CASE("cone angle at infinity (subcritical)") {
    auto g = geom_n2();
    {
        auto c = derive(g, Rational(3, 20));  // beta = 0.15
        auto sol = solve_profile(c);
        auto far = cone_angle_at_infinity(c, sol);
        const double gamma = subcritical_gamma(c);
        CHECK(far.angle == doctest::Approx(2.0 * M_PI * c.mu * (c.lambda - gamma)));
        // decay-exponent cross-check within 1e-4
        CHECK(far.decay_rate_fit / (c.mu * (c.lambda - gamma)) ==
              doctest::Approx(1.0).epsilon(1e-4));
        // range (0, 2 pi (alpha-1))
        CHECK(far.angle > 0.0);
        CHECK(far.angle < 2.0 * M_PI * (c.alpha() - 1.0));
    }
    {
        // beta -> 0: angle ~ 2 pi mu alpha beta/(alpha-1) within 1% at beta = 1e-3
        auto c = derive(g, 1e-3);
        auto sol = solve_profile(c);
        auto far = cone_angle_at_infinity(c, sol);
        const double predicted = 2.0 * M_PI * c.mu * c.alpha() * c.beta / (c.alpha() - 1.0);
        CHECK(far.angle / predicted == doctest::Approx(1.0).epsilon(0.01));
    }
    {
        // beta -> beta_*-: angle -> 2 pi (alpha - 1)
        auto c = derive(g, 0.25 - 1e-7);
        auto sol = solve_profile(c);
        auto far = cone_angle_at_infinity(c, sol);
        CHECK(far.angle / (2.0 * M_PI * (c.alpha() - 1.0)) == doctest::Approx(1.0).epsilon(1e-2));
    }
    CHECK_THROWS_AS(cone_angle_at_infinity(derive(g, Rational(3, 10)),
                                           solve_profile(derive(g, Rational(3, 10)))),
                    RegimeError);
}

TEST_CASE("cone comparison in the gluing window") {
    auto c = derive(geom_n2(), 0.25 + 1e-8);
    // window where the correction and s/alpha are both small
    auto cmp = cone_comparison(c, 1.73e-3, 1e-2);
    CHECK(cmp.kappa < 0.02);
    CHECK(cmp.sup_ratio >= 1.0 - 1e-12);
    CHECK(cmp.inf_ratio <= cmp.sup_ratio);

    // critical, s -> 0: ratio -> 1
    auto cc = derive(geom_n2(), Rational(1, 4));
    auto cmp0 = cone_comparison(cc, 1e-6, 1e-4);
    CHECK(cmp0.kappa < 1e-4);

    // window violation: s^n not >> beta - beta_*
    auto cbig = derive(geom_n2(), 0.25 + 1e-4);
    CHECK_THROWS_AS(cone_comparison(cbig, 1e-3, 1e-2), WindowError);

    // supercritical blow-up branch below the window: V ~ C_beta/s^{n-1}
    const double s_small = 1e-5;
    const double blow = c.C_beta / std::pow(s_small, c.geom.n - 1);
    CHECK(potential_V(c, s_small) / blow == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("g1 linearization") {
    auto g = geom_n2();
    auto c0 = derive(g, Rational(1, 4));
    const double s = 0.5;
    auto g1 = g1_linearization(c0, s);

    // finite-difference slope in beta matches the analytic dV/dbeta
    const double h = 1e-6;
    auto cp = derive(g, 0.25 + h);
    const double fd = (potential_V(cp, s) - potential_V(c0, s)) / h;
    CHECK(fd == doctest::Approx(g1.dV_dbeta).epsilon(1e-4));

    // g1 is beta-independent: same coefficients from a different base angle
    auto g1b = g1_linearization(derive(g, Rational(3, 10)), s);
    CHECK(g1b.ds2_coeff == doctest::Approx(g1.ds2_coeff).epsilon(1e-13));
    CHECK(g1b.eta2_coeff == doctest::Approx(g1.eta2_coeff).epsilon(1e-13));

    // L'Hopital limit: (alpha^{n+1}-s^{n+1})/(alpha-s) -> (n+1) alpha^n
    const double al = c0.alpha();
    CHECK(metric_slope_sum(c0, al) ==
          doctest::Approx((c0.geom.n + 1) * std::pow(al, c0.geom.n)).epsilon(1e-14));

    // second difference: V is affine in beta, so the g1 term is exact
    auto cm = derive(g, 0.25 - h);
    const double second = potential_V(cp, s) - 2.0 * potential_V(c0, s) + potential_V(cm, s);
    CHECK(std::fabs(second) < 1e-14);
}

TEST_CASE("small-beta collapse") {
    auto c = derive(geom_n2(), 1e-3);
    auto rep = small_beta_collapse(c);
    CHECK(rep.ratio_325 == doctest::Approx(1.0).epsilon(0.01));
    CHECK(rep.transverse_factor_limit == doctest::Approx(2.0 * c.alpha() / (c.alpha() - 1.0)));
    CHECK(rep.interval_half_length > 0.0);
    CHECK(std::isfinite(rep.interval_half_length));

    // circle length at s = lambda is O(beta): halving beta halves the length
    auto c2 = derive(geom_n2(), 5e-4);
    auto rep2 = small_beta_collapse(c2);
    CHECK(rep2.circle_length_lambda / rep.circle_length_lambda ==
          doctest::Approx(0.5).epsilon(0.02));
    // sup 4V = O(beta^2)
    CHECK(rep2.sup_4V / rep.sup_4V == doctest::Approx(0.25).epsilon(0.05));

    CHECK_THROWS_AS(small_beta_collapse(derive(geom_n2(), Rational(1, 5))), RegimeError);
}

TEST_CASE("one-dimensional rigidity inequality") {
    auto rep = futaki_rigidity_check({});
    CHECK(rep.strict);
    CHECK(rep.gap > 0.0);
    // for barriers with these tails the phi''-average of f is exactly 1/2
    CHECK(rep.ratio == doctest::Approx(0.5).epsilon(1e-10));

    // translation invariance
    auto rep2 = futaki_rigidity_check({2.0, 1.7, false});
    CHECK(rep2.gap == doctest::Approx(rep.gap).epsilon(1e-10));

    // degenerate f == 1: equality, flagged non-strict
    auto deg = futaki_rigidity_check({2.0, 0.0, true});
    CHECK(deg.ratio == 1.0);
    CHECK_FALSE(deg.strict);

    CHECK_THROWS_AS(futaki_rigidity_check({-1.0, 0.0, false}), BarrierError);
}
