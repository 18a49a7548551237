#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>

#include "tvwb/error.hpp"

namespace tvwb {

// Exact nonnegative fraction with 64-bit terms. Input files carry entries
// like "1/3" or "0.25"; keeping them exact makes weight-class detection
// independent of decimal rounding.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) fail(ErrorKind::invalid_input, "rational with zero denominator");
        if (den < 0) { num = -num; den = -den; }
        std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) { num /= g; den /= g; }
    }

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }

    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const {
        return static_cast<__int128>(num) * o.den < static_cast<__int128>(o.num) * den;
    }

    Rational operator+(const Rational& o) const {
        __int128 n = static_cast<__int128>(num) * o.den + static_cast<__int128>(o.num) * den;
        __int128 d = static_cast<__int128>(den) * o.den;
        __int128 g = gcd128(n < 0 ? -n : n, d);
        if (g > 1) { n /= g; d /= g; }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            fail(ErrorKind::invalid_input, "rational overflow");
        return Rational(static_cast<std::int64_t>(n), static_cast<std::int64_t>(d));
    }

    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }

private:
    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) { __int128 t = a % b; a = b; b = t; }
        return a;
    }
};

// Accepts "3", "-1/3", "0.25", "1e-2"-free decimals. Returns nullopt when the
// text is not an exact fraction (callers may then fall back to strtod).
std::optional<Rational> parse_rational(const std::string& text);

} // namespace tvwb
