#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "errors.hpp"
#include "field_vector.hpp"
#include "numbers.hpp"

namespace resil {

// ---------------------------------------------------------------------------
// Exact counting arithmetic
//
// Counting kernels are templates over the count type. They run on uint64
// when an a priori bound on every intermediate value fits, and on BigInt
// otherwise. The uint64 path still traps on overflow.
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t add_counts(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("count overflow in 64-bit path");
    return r;
}

inline std::uint64_t mul_counts(std::uint64_t a, std::uint64_t b) {
    std::uint64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("count overflow in 64-bit path");
    return r;
}

inline BigInt add_counts(const BigInt& a, const BigInt& b) { return a + b; }
inline BigInt mul_counts(const BigInt& a, const BigInt& b) { return a * b; }

/// Whether (2 * n)^(2k), the total number of signed 2k-tuples, stays below 2^62.
inline bool tuples_fit_word(std::size_t n, std::size_t k) {
    return 2.0 * static_cast<double>(k) * std::log2(2.0 * static_cast<double>(std::max<std::size_t>(n, 1))) < 62.0;
}

template <typename Count>
std::vector<std::vector<Count>> binomial_table(std::size_t up_to) {
    std::vector<std::vector<Count>> c(up_to + 1);
    for (std::size_t i = 0; i <= up_to; ++i) {
        c[i].assign(i + 1, Count(1));
        for (std::size_t j = 1; j < i; ++j) c[i][j] = add_counts(c[i - 1][j - 1], c[i - 1][j]);
    }
    return c;
}

template <typename Count>
std::vector<Count> modular_walk(const FieldVector& a) {
    const auto p = a.prime().value();
    std::vector<Count> cur(p, Count(0)), next(p);
    cur[0] = Count(1);
    for (auto x : a.coords()) {
        const auto ux = static_cast<std::uint64_t>(x);
        for (std::uint64_t r = 0; r < p; ++r) {
            const auto plus = r >= ux ? r - ux : r + p - ux;        // r - x
            const auto minus = r + ux >= p ? r + ux - p : r + ux;  // r + x
            next[r] = add_counts(cur[plus], cur[minus]);
        }
        std::swap(cur, next);
    }
    return cur;
}

template <typename Count>
std::map<std::int64_t, Count> integer_walk(const FieldVector& a) {
    std::map<std::int64_t, Count> cur{{0, Count(1)}};
    for (auto x : a.coords()) {
        std::map<std::int64_t, Count> next;
        for (const auto& [v, c] : cur) {
            next[v + x] = add_counts(next[v + x], c);
            next[v - x] = add_counts(next[v - x], c);
        }
        cur = std::move(next);
    }
    return cur;
}

template <typename Count>
Count rk_by_convolution(const FieldVector& a, std::size_t k) {
    const auto& mod = a.prime();
    const auto p = mod.value();
    // one step: f(x) = #{(i, sigma) : sigma * a_i = x}
    std::map<std::uint64_t, Count> step;
    for (auto x : a.coords()) {
        const auto ux = static_cast<std::uint64_t>(x);
        step[ux] = add_counts(step[ux], Count(1));
        step[mod.negate(ux)] = add_counts(step[mod.negate(ux)], Count(1));
    }
    // g = f^{*k}; then R_k = sum_x g(x) g(-x)
    std::vector<Count> g(p, Count(0)), next(p);
    g[0] = Count(1);
    for (std::size_t round = 0; round < k; ++round) {
        std::fill(next.begin(), next.end(), Count(0));
        for (std::uint64_t r = 0; r < p; ++r) {
            if (g[r] == 0) continue;
            for (const auto& [s, c] : step) {
                const auto t = r + s >= p ? r + s - p : r + s;
                next[t] = add_counts(next[t], mul_counts(g[r], c));
            }
        }
        std::swap(g, next);
    }
    Count total(0);
    for (std::uint64_t r = 0; r < p; ++r) {
        if (g[r] != 0) total = add_counts(total, mul_counts(g[r], g[mod.negate(r)]));
    }
    return total;
}

/// Counts signed ordered 2k-tuples summing to 0 mod p, split by the number
/// of distinct indices used. Returns counts[d] for d = 0..2k.
///
/// The DP walks the coordinates once. For coordinate i it chooses a
/// multiplicity c (how many of the 2k slots use i) and the number j of those
/// slots carrying a minus sign. Slots are interleaved with those already
/// placed in C(u + c, c) ways, and the minus slots are chosen in C(c, j) ways.
template <typename Count>
std::vector<Count> rk_by_distinct_count(const FieldVector& a, std::size_t k) {
    const auto& mod = a.prime();
    const auto p = mod.value();
    const std::size_t slots = 2 * k;
    const auto binom = binomial_table<Count>(slots);

    // state[u][d][r]: u slots used, d distinct indices, partial sum r
    auto at = [&](std::size_t u, std::size_t d, std::uint64_t r) { return (u * (slots + 1) + d) * p + r; };
    std::vector<Count> state((slots + 1) * (slots + 1) * p, Count(0));
    state[at(0, 0, 0)] = Count(1);

    for (auto coord : a.coords()) {
        auto next = state;  // c = 0
        // shift[c][j] = (c - 2j) * a_i mod p
        std::vector<std::vector<std::uint64_t>> shift(slots + 1);
        for (std::size_t c = 1; c <= slots; ++c) {
            for (std::size_t j = 0; j <= c; ++j) {
                const auto coeff = static_cast<std::int64_t>(c) - 2 * static_cast<std::int64_t>(j);
                const auto prod = static_cast<__int128>(coeff) * coord % static_cast<__int128>(p);
                shift[c].push_back(mod.reduce(static_cast<std::int64_t>(prod)));
            }
        }
        for (std::size_t u = 0; u < slots; ++u) {
            for (std::size_t d = 0; d <= u; ++d) {
                for (std::uint64_t r = 0; r < p; ++r) {
                    const Count& v = state[at(u, d, r)];
                    if (v == 0) continue;
                    for (std::size_t c = 1; u + c <= slots; ++c) {
                        const Count placed = mul_counts(v, binom[u + c][c]);
                        for (std::size_t j = 0; j <= c; ++j) {
                            auto t = r + shift[c][j];
                            if (t >= p) t -= p;
                            auto& dst = next[at(u + c, d + 1, t)];
                            dst = add_counts(dst, mul_counts(placed, binom[c][j]));
                        }
                    }
                }
            }
        }
        state = std::move(next);
    }
    std::vector<Count> out(slots + 1, Count(0));
    for (std::size_t d = 0; d <= slots; ++d) out[d] = state[at(slots, d, 0)];
    return out;
}

inline BigInt to_big(std::uint64_t x) { return BigInt(x); }
inline BigInt to_big(const BigInt& x) { return x; }

} // namespace detail

// ---------------------------------------------------------------------------
// Distributions and atom probabilities
// ---------------------------------------------------------------------------

/// Exact law of sum_i eps_i a_i for independent uniform signs eps_i.
/// Only values with positive count are stored.
struct WalkDistribution {
    std::size_t n = 0;
    std::map<std::int64_t, BigInt> counts;

    BigInt total() const { return BigInt(1) << n; }

    Rational probability(std::int64_t x) const {
        auto it = counts.find(x);
        return it == counts.end() ? Rational(0) : Rational(it->second, total());
    }
};

inline WalkDistribution sum_distribution(const FieldVector& a) {
    WalkDistribution out;
    out.n = a.size();
    auto keep = [&](std::int64_t value, const auto& count) {
        if (count != 0) out.counts.emplace(value, detail::to_big(count));
    };
    auto collect = [&](const auto& walk) {
        if constexpr (requires { walk.begin()->second; }) {
            for (const auto& [value, count] : walk) keep(value, count);
        } else {
            for (std::size_t r = 0; r < walk.size(); ++r) keep(static_cast<std::int64_t>(r), walk[r]);
        }
    };
    const bool small = a.size() < 63;
    if (a.is_modular()) {
        small ? collect(detail::modular_walk<std::uint64_t>(a)) : collect(detail::modular_walk<BigInt>(a));
    } else {
        small ? collect(detail::integer_walk<std::uint64_t>(a)) : collect(detail::integer_walk<BigInt>(a));
    }
    return out;
}

/// Largest atom probability of the signed sum, over Z or F_p.
inline Rational rho(const FieldVector& a) {
    detail::require(a.size() >= 1, "rho requires a nonempty vector");
    if (a.is_modular()) {
        // Avoid building the map; only the maximum is needed.
        auto best = [&](auto&& walk) {
            BigInt m = 0;
            for (const auto& c : walk) {
                BigInt b = detail::to_big(c);
                if (b > m) m = b;
            }
            return m;
        };
        BigInt top = a.size() < 63 ? best(detail::modular_walk<std::uint64_t>(a)) : best(detail::modular_walk<BigInt>(a));
        return Rational(top, BigInt(1) << a.size());
    }
    const auto dist = sum_distribution(a);
    BigInt top = 0;
    for (const auto& [v, c] : dist.counts) top = c > top ? c : top;
    return Rational(top, dist.total());
}

// ---------------------------------------------------------------------------
// Solution counts R_k and R_k^alpha
// ---------------------------------------------------------------------------

/// An exact count of signed 2k-tuples summing to 0 mod p; alpha set for R_k^alpha.
struct SolutionCount {
    std::size_t k = 0;
    std::optional<Rational> alpha;
    BigInt value;
};

/// Number of ordered (i_1..i_2k) in [n]^2k with signs in {+-1}^2k such that
/// the signed sum of the a_i vanishes mod p.
inline SolutionCount count_rk(const FieldVector& a, std::size_t k) {
    a.prime();
    detail::require(k >= 1, "k must be positive");
    BigInt value = detail::tuples_fit_word(a.size(), k) ? BigInt(detail::rk_by_convolution<std::uint64_t>(a, k))
                                                        : detail::rk_by_convolution<BigInt>(a, k);
    return {k, std::nullopt, std::move(value)};
}

/// Whether d distinct indices meet the threshold (1 + alpha) k, compared exactly.
inline bool meets_distinct_threshold(std::size_t distinct, std::size_t k, const Rational& alpha) {
    return Rational(distinct) >= (1 + alpha) * Rational(k);
}

inline void require_alpha(const Rational& alpha) {
    detail::require(alpha >= 0 && alpha <= 1, "alpha must lie in [0, 1]");
}

/// Solutions counted by R_k that use at least (1 + alpha) k distinct indices.
inline SolutionCount count_rk_alpha(const FieldVector& a, std::size_t k, const Rational& alpha) {
    a.prime();
    detail::require(k >= 1, "k must be positive");
    require_alpha(alpha);
    BigInt value = 0;
    auto accumulate = [&](const auto& by_distinct) {
        for (std::size_t d = 0; d < by_distinct.size(); ++d) {
            if (meets_distinct_threshold(d, k, alpha)) value += detail::to_big(by_distinct[d]);
        }
    };
    if (detail::tuples_fit_word(a.size(), k)) accumulate(detail::rk_by_distinct_count<std::uint64_t>(a, k));
    else accumulate(detail::rk_by_distinct_count<BigInt>(a, k));
    return {k, alpha, std::move(value)};
}

/// Outcome of checking R_k <= R_k^alpha + (40 k^(1-alpha) n^(1+alpha))^k.
struct RkVersusRkaCheck {
    bool holds = false;
    BigInt rk;
    BigInt rk_alpha;
    double additive_term = 0.0;  // (40 k^(1-alpha) n^(1+alpha))^k
    double slack = 0.0;          // rk_alpha + additive_term - rk
};

inline RkVersusRkaCheck lemma_rk_vs_rka_check(const FieldVector& a, std::size_t k, const Rational& alpha) {
    const auto n = a.size();
    detail::require(k >= 1, "k must be positive");
    detail::require(2 * k <= n, "hypothesis k <= n/2 violated");
    require_alpha(alpha);
    RkVersusRkaCheck out;
    out.rk = count_rk(a, k).value;
    out.rk_alpha = count_rk_alpha(a, k, alpha).value;
    const double al = to_double(alpha);
    const double log_term = static_cast<double>(k) *
                            (std::log(40.0) + (1.0 - al) * std::log(static_cast<double>(k)) + (1.0 + al) * std::log(static_cast<double>(n)));
    out.additive_term = std::exp(log_term);
    const long double excess = static_cast<long double>((out.rk - out.rk_alpha).convert_to<double>());
    out.slack = static_cast<double>(static_cast<long double>(out.additive_term) - excess);
    out.holds = excess <= static_cast<long double>(out.additive_term);
    return out;
}

} // namespace resil
