#pragma once

#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <string>

#include "calabi/errors.hpp"

namespace calabi {

/// Exact rational arithmetic on int64 with overflow checking.
/// Parameter validation and regime classification must be exact, so the
/// geometric inputs (alpha, beta) are carried as rationals end to end and
/// only converted to double at solver boundaries.
class Rational {
  public:
    Rational() : num_(0), den_(1) {}
    Rational(long long v) : num_(v), den_(1) {}
    Rational(long long num, long long den) : num_(num), den_(den) { normalize(); }

    static Rational parse(const std::string& text) {
        auto slash = text.find('/');
        try {
            if (slash == std::string::npos) return Rational(std::stoll(text));
            long long num = std::stoll(text.substr(0, slash));
            long long den = std::stoll(text.substr(slash + 1));
            return Rational(num, den);
        } catch (const std::invalid_argument&) {
            throw DomainError("cannot parse rational '" + text + "'");
        } catch (const std::out_of_range&) {
            throw DomainError("rational out of range '" + text + "'");
        }
    }

    long long num() const { return num_; }
    long long den() const { return den_; }
    double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }
    explicit operator double() const { return value(); }

    Rational operator-() const { return Rational(-num_, den_); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return Rational(checked(carry(a.num_, b.den_) + carry(b.num_, a.den_)),
                        checked(carry(a.den_, b.den_)));
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return Rational(checked(carry(a.num_, b.num_)), checked(carry(a.den_, b.den_)));
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw DomainError("rational division by zero");
        return Rational(checked(carry(a.num_, b.den_)), checked(carry(a.den_, b.num_)));
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return carry(a.num_, b.den_) < carry(b.num_, a.den_);
    }
    friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
    friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
    friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

    Rational pow(int e) const {
        if (e < 0) return Rational(1) / pow(-e);
        Rational r(1), base = *this;
        while (e > 0) {
            if (e & 1) r = r * base;
            base = base * base;
            e >>= 1;
        }
        return r;
    }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

  private:
    using Wide = __int128;

    static Wide carry(long long a, long long b) { return static_cast<Wide>(a) * b; }

    static long long checked(Wide v) {
        if (v > static_cast<Wide>(INT64_MAX) || v < static_cast<Wide>(INT64_MIN))
            throw DomainError("rational overflow");
        return static_cast<long long>(v);
    }

    void normalize() {
        if (den_ == 0) throw DomainError("rational with zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        long long g = std::gcd(std::llabs(num_), den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
        if (num_ == 0) den_ = 1;
    }

    long long num_;
    long long den_;
};

}  // namespace calabi
