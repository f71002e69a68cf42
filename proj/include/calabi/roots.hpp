#pragma once

#include <cmath>
#include <functional>

#include "calabi/errors.hpp"

namespace calabi {

/// Bracketed bisection; requires f(a) and f(b) of opposite sign.
template <class F>
double bisect(const F& f, double a, double b, double x_tol, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa < 0) == (fb < 0)) throw NoRootError("bisect: no sign change on bracket");
    for (int i = 0; i < max_iter; ++i) {
        double m = 0.5 * (a + b);
        double fm = f(m);
        if (fm == 0.0 || 0.5 * (b - a) < x_tol) return m;
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

/// Newton iteration safeguarded by a shrinking bisection bracket.
/// Falls back to bisection whenever the Newton step leaves the bracket or
/// the derivative degenerates. Tolerance is on |x_{k+1} - x_k| relative to
/// the bracket scale.
template <class F, class DF>
double newton_bisect(const F& f, const DF& df, double a, double b, double rel_tol = 1e-14,
                     int max_iter = 120) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa < 0) == (fb < 0)) throw NoRootError("newton_bisect: no sign change on bracket");
    double x = 0.5 * (a + b);
    for (int i = 0; i < max_iter; ++i) {
        double fx = f(x);
        if (fx == 0.0) return x;
        if ((fx < 0) == (fa < 0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        double d = df(x);
        double step = (d != 0.0) ? fx / d : 0.0;
        double xn = x - step;
        if (!(xn > a && xn < b) || d == 0.0) xn = 0.5 * (a + b);
        double scale = std::max({std::fabs(a), std::fabs(b), 1.0});
        if (std::fabs(xn - x) <= rel_tol * scale) return xn;
        x = xn;
    }
    return x;
}

/// Brent-style root finder (inverse quadratic / secant with bisection
/// safeguard). Used where no cheap derivative is available.
template <class F>
double brent(const F& f, double a, double b, double tol = 1e-14, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa < 0) == (fb < 0)) throw NoRootError("brent: no sign change on bracket");
    double c = a, fc = fa, d = b - a, e = d;
    for (int i = 0; i < max_iter; ++i) {
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * 1e-16 * std::fabs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= tol1 || fb == 0.0) return b;
        if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
            double s = fb / fa, p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                double qq = fa / fc, r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0) q = -q;
            p = std::fabs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::fabs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
        fb = f(b);
        if ((fb < 0) == (fc < 0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    throw ConvergenceError("brent: iteration limit");
}

}  // namespace calabi
