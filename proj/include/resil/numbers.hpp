#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "errors.hpp"

namespace resil {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// ---------------------------------------------------------------------------
// Primality
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    std::uint64_t result = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1) result = mulmod(result, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return result;
}

} // namespace detail

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
inline bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        if (n % q == 0) return n == q;
    }
    std::uint64_t d = n - 1;
    int r = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++r;
    }
    for (std::uint64_t base : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
        std::uint64_t x = detail::powmod(base, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int i = 1; i < r; ++i) {
            x = detail::mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

/// An odd prime modulus. Construction validates.
class PrimeModulus {
public:
    explicit PrimeModulus(std::uint64_t p) : p_(p) {
        detail::require(p >= 3 && p <= (std::uint64_t{1} << 62) && is_prime(p),
                        "modulus " + std::to_string(p) + " is not an odd prime below 2^62");
    }

    std::uint64_t value() const noexcept { return p_; }
    operator std::uint64_t() const noexcept { return p_; }

    std::uint64_t reduce(std::int64_t x) const noexcept {
        const auto p = static_cast<std::int64_t>(p_);
        auto r = x % p;
        return static_cast<std::uint64_t>(r < 0 ? r + p : r);
    }

    std::uint64_t negate(std::uint64_t x) const noexcept { return x == 0 ? 0 : p_ - x; }

    friend bool operator==(const PrimeModulus&, const PrimeModulus&) = default;

private:
    std::uint64_t p_;
};

// ---------------------------------------------------------------------------
// Rationals
// ---------------------------------------------------------------------------

/// Parses "a/b", "a" or a decimal such as "0.25" into an exact rational.
inline Rational parse_rational(const std::string& text) {
    auto digits = [](const std::string& s) {
        return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
    };
    std::string s = text;
    bool negative = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
        negative = s[0] == '-';
        s.erase(0, 1);
    }
    Rational value;
    if (auto slash = s.find('/'); slash != std::string::npos) {
        const auto num = s.substr(0, slash), den = s.substr(slash + 1);
        detail::require(digits(num) && digits(den), "malformed rational '" + text + "'");
        BigInt d(den);
        detail::require(d != 0, "rational '" + text + "' has zero denominator");
        value = Rational(BigInt(num), d);
    } else if (auto dot = s.find('.'); dot != std::string::npos) {
        const auto whole = s.substr(0, dot), frac = s.substr(dot + 1);
        detail::require((whole.empty() || digits(whole)) && digits(frac), "malformed rational '" + text + "'");
        BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(frac.size()));
        value = Rational(BigInt(whole.empty() ? "0" : whole) * scale + BigInt(frac), scale);
    } else {
        detail::require(digits(s), "malformed rational '" + text + "'");
        value = Rational(BigInt(s));
    }
    return negative ? Rational(-value) : value;
}

inline std::string to_string(const Rational& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(const BigInt& x) { return x.convert_to<double>(); }

/// Natural log of a positive big integer, accurate far beyond double range.
inline double log_of(const BigInt& x) {
    const auto bits = msb(x);
    if (bits < 1000) return std::log(x.convert_to<double>());
    const unsigned shift = static_cast<unsigned>(bits - 60);
    return std::log(BigInt(x >> shift).convert_to<double>()) + shift * std::log(2.0);
}

} // namespace resil
