#pragma once

#include <cstdint>
#include <compare>
#include <numeric>
#include <string>

#include "csh/errors.hpp"

namespace csh {

/// Exact rational number on int64 with 128-bit intermediates.
///
/// All load and cost formulas are evaluated in this type; floating point is
/// used only for display. Values stay tiny (denominators are products of
/// small protocol parameters), so int64 storage is ample.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) { normalize(); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return make(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) {
        return make(i128(a.num_) * b.den_ - i128(b.num_) * a.den_, i128(a.den_) * b.den_);
    }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return make(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw ConstraintError("rational division by zero");
        return make(i128(a.num_) * b.den_, i128(a.den_) * b.num_);
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        i128 lhs = i128(a.num_) * b.den_;
        i128 rhs = i128(b.num_) * a.den_;
        if (lhs < rhs) return std::strong_ordering::less;
        if (lhs > rhs) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    /// "3/4", or just "3" for integers.
    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

    /// Fixed-point decimal rendering ("0.2500" for 1/4), round half away from zero.
    std::string decimal(int places = 4) const {
        i128 scale = 1;
        for (int i = 0; i < places; ++i) scale *= 10;
        i128 n = i128(num_ < 0 ? -num_ : num_) * scale;
        i128 scaled = (n + den_ / 2) / den_;
        std::string digits;
        if (scaled == 0) digits = "0";
        while (scaled > 0) {
            digits.insert(digits.begin(), static_cast<char>('0' + int(scaled % 10)));
            scaled /= 10;
        }
        while (static_cast<int>(digits.size()) <= places) digits.insert(digits.begin(), '0');
        digits.insert(digits.end() - places, '.');
        if (num_ < 0) digits.insert(digits.begin(), '-');
        return digits;
    }

    Rational abs() const { return num_ < 0 ? Rational(-num_, den_) : *this; }

private:
    using i128 = __int128;

    static Rational make(i128 n, i128 d) {
        if (d < 0) { n = -n; d = -d; }
        i128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        constexpr i128 lo = INT64_MIN, hi = INT64_MAX;
        if (n < lo || n > hi || d > hi)
            throw ConstraintError("rational overflow");
        Rational r;
        r.num_ = static_cast<std::int64_t>(n);
        r.den_ = static_cast<std::int64_t>(d);
        return r;
    }

    static i128 gcd128(i128 a, i128 b) {
        while (b != 0) { i128 t = a % b; a = b; b = t; }
        return a == 0 ? 1 : a;
    }

    void normalize() {
        if (den_ == 0) throw ConstraintError("rational with zero denominator");
        *this = make(num_, den_);
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

/// Exact binomial coefficient; throws ConstraintError on uint64 overflow.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        acc = acc * (n - k + i) / i;
        if (acc > UINT64_MAX) throw ConstraintError("binomial overflow");
    }
    return static_cast<std::uint64_t>(acc);
}

/// q^e with overflow detection.
inline std::uint64_t checked_pow(std::uint64_t q, std::uint64_t e) {
    unsigned __int128 acc = 1;
    for (std::uint64_t i = 0; i < e; ++i) {
        acc *= q;
        if (acc > UINT64_MAX) throw ConstraintError("power overflow");
    }
    return static_cast<std::uint64_t>(acc);
}

}  // namespace csh
