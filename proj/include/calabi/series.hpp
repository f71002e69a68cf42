#pragma once

#include <vector>

#include "calabi/errors.hpp"

namespace calabi {

/// Dense truncated power series sum_{k<=N} c[k] x^k with coefficient type T.
/// T = double for the runtime expansion machinery; T = Rational where the
/// matching recursion is exercised with exact arithmetic in tests.
template <class T>
class TruncatedSeries {
  public:
    explicit TruncatedSeries(int order) : coef_(order + 1, T(0)) {}
    TruncatedSeries(std::vector<T> coef) : coef_(std::move(coef)) {
        if (coef_.empty()) coef_.resize(1, T(0));
    }

    int order() const { return static_cast<int>(coef_.size()) - 1; }
    const T& operator[](int k) const { return coef_[k]; }
    T& operator[](int k) { return coef_[k]; }

    static TruncatedSeries constant(T v, int order) {
        TruncatedSeries s(order);
        s[0] = v;
        return s;
    }
    static TruncatedSeries identity(int order) {
        TruncatedSeries s(order);
        if (order >= 1) s[1] = T(1);
        return s;
    }

    friend TruncatedSeries operator+(const TruncatedSeries& a, const TruncatedSeries& b) {
        TruncatedSeries s(std::min(a.order(), b.order()));
        for (int k = 0; k <= s.order(); ++k) s[k] = a[k] + b[k];
        return s;
    }
    friend TruncatedSeries operator-(const TruncatedSeries& a, const TruncatedSeries& b) {
        TruncatedSeries s(std::min(a.order(), b.order()));
        for (int k = 0; k <= s.order(); ++k) s[k] = a[k] - b[k];
        return s;
    }
    friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
        TruncatedSeries s(std::min(a.order(), b.order()));
        for (int i = 0; i <= s.order(); ++i)
            for (int j = 0; i + j <= s.order() && j <= b.order(); ++j)
                if (i <= a.order()) s[i + j] = s[i + j] + a[i] * b[j];
        return s;
    }
    TruncatedSeries scaled(T f) const {
        TruncatedSeries s(order());
        for (int k = 0; k <= order(); ++k) s[k] = coef_[k] * f;
        return s;
    }

    /// (1 + g)^e with g(0) = 0, binomial coefficients built by recurrence so
    /// rational exponents stay exact over rational T.
    static TruncatedSeries one_plus_pow(const TruncatedSeries& g, T exponent) {
        if (!(g[0] == T(0))) throw DomainError("one_plus_pow: series must vanish at 0");
        const int N = g.order();
        TruncatedSeries result = constant(T(1), N);
        TruncatedSeries gpow = constant(T(1), N);
        T binom(1);
        for (int k = 1; k <= N; ++k) {
            binom = binom * (exponent - T(k - 1)) / T(k);
            gpow = gpow * g;
            result = result + gpow.scaled(binom);
        }
        return result;
    }

    /// exp(g) with g(0) = 0.
    static TruncatedSeries exp_of(const TruncatedSeries& g) {
        if (!(g[0] == T(0))) throw DomainError("exp_of: series must vanish at 0");
        const int N = g.order();
        TruncatedSeries result = constant(T(1), N);
        TruncatedSeries term = constant(T(1), N);
        T factorial(1);
        for (int k = 1; k <= N; ++k) {
            factorial = factorial * T(k);
            term = term * g;
            result = result + term.scaled(T(1) / factorial);
        }
        return result;
    }

    /// Composition a(b(x)) with b(0) = 0 (Horner on the truncated ring).
    TruncatedSeries compose(const TruncatedSeries& inner) const {
        if (!(inner[0] == T(0))) throw DomainError("compose: inner series must vanish at 0");
        const int N = std::min(order(), inner.order());
        TruncatedSeries result = constant(coef_[order()], N);
        for (int k = order() - 1; k >= 0; --k) {
            result = result * inner;
            result[0] = result[0] + coef_[k];
        }
        return result;
    }

    /// Term-by-term antiderivative with zero constant.
    TruncatedSeries integrated() const {
        TruncatedSeries s(order());
        for (int k = 0; k < order(); ++k) s[k + 1] = coef_[k] / T(k + 1);
        return s;
    }

    double eval(double x) const {
        double acc = 0.0;
        for (int k = order(); k >= 0; --k) acc = acc * x + static_cast<double>(coef_[k]);
        return acc;
    }

  private:
    std::vector<T> coef_;
};

}  // namespace calabi
