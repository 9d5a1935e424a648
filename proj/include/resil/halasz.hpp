#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "anticoncentration.hpp"
#include "errors.hpp"
#include "field_vector.hpp"
#include "numbers.hpp"
#include "parallel.hpp"

namespace resil {

/// Parameters of the Halasz-type bound
///   rho_p(a) <= 1/p + C R_k(a) / (2^{2k} n^{2k} sqrt(M)) + e^{-M}.
struct HalaszParams {
    std::size_t k = 1;
    double big_m = 1.0;
    double c = 1.0;
};

/// Throws precondition_error naming the first violated hypothesis.
/// k = 0 is rejected: R_0 = 1 makes the middle term C / sqrt(M), which says nothing.
inline void check_halasz_hypotheses(const FieldVector& a, std::size_t k, double big_m) {
    a.prime();
    detail::require(!a.is_zero(), "hypothesis a != 0 violated");
    detail::require(k >= 1, "k must be at least 1");
    detail::require(big_m > 0 && std::isfinite(big_m), "M must be a positive real");
    const auto supp = static_cast<double>(a.support_size());
    const auto n = static_cast<double>(a.size());
    detail::require(30.0 * big_m <= supp, "hypothesis 30M <= |supp(a)| violated (30M = " + std::to_string(30.0 * big_m) +
                                              ", |supp(a)| = " + std::to_string(a.support_size()) + ")");
    detail::require(80.0 * static_cast<double>(k) * big_m <= n,
                    "hypothesis 80kM <= n violated (80kM = " + std::to_string(80.0 * static_cast<double>(k) * big_m) +
                        ", n = " + std::to_string(a.size()) + ")");
}

/// True when the support is under half the length; the bound normalizes by n
/// and is weak for such vectors even though the hypotheses may hold.
inline bool sparse_relative_to_length(const FieldVector& a) { return 2 * a.support_size() < a.size(); }

/// log(2^{2k} n^{2k}) = 2k log(2n)
inline double log_tuple_count(std::size_t n, std::size_t k) {
    return 2.0 * static_cast<double>(k) * std::log(2.0 * static_cast<double>(n));
}

/// The bound evaluated from a precomputed R_k.
inline double halasz_bound_value(std::uint64_t p, std::size_t n, const BigInt& rk, std::size_t k, double big_m, double c) {
    const double normalized = std::exp(log_of(rk) - log_tuple_count(n, k));
    return 1.0 / static_cast<double>(p) + c * normalized / std::sqrt(big_m) + std::exp(-big_m);
}

inline double halasz_bound(const FieldVector& a, const HalaszParams& params) {
    check_halasz_hypotheses(a, params.k, params.big_m);
    detail::require(params.c >= 0 && std::isfinite(params.c), "constant C must be a nonnegative real");
    return halasz_bound_value(a.prime().value(), a.size(), count_rk(a, params.k).value, params.k, params.big_m, params.c);
}

/// Rounds x > 0 up to three significant figures.
inline double round_up_3sf(double x) {
    if (x <= 0) return 0.0;
    const double scale = std::pow(10.0, 2 - std::floor(std::log10(x)));
    double r = std::ceil(x * scale) / scale;
    // ceil of an inexact product can land one unit low
    if (r < x) r += 1.0 / scale;
    return r;
}

/// Per-vector measurements behind a calibration.
struct CalibrationSample {
    double rho = 0.0;
    BigInt rk;
    double required_c = 0.0;  // smallest C with rho <= bound, clamped at 0
};

struct CalibrationResult {
    std::size_t k = 0;
    double big_m = 0.0;
    std::size_t sample_size = 0;
    std::uint64_t p = 0;
    std::size_t n = 0;
    double c_min = 0.0;        // rounded up to 3 significant figures
    double c_min_exact = 0.0;  // before rounding
    std::size_t worst_index = 0;
    FieldVector worst_vector = FieldVector::over_integers({});
};

inline CalibrationSample measure_for_calibration(const FieldVector& a, std::size_t k, double big_m) {
    check_halasz_hypotheses(a, k, big_m);
    CalibrationSample s;
    s.rho = to_double(rho(a));
    s.rk = count_rk(a, k).value;
    const double slack = s.rho - 1.0 / static_cast<double>(a.prime().value()) - std::exp(-big_m);
    if (slack > 0) s.required_c = slack * std::sqrt(big_m) / std::exp(log_of(s.rk) - log_tuple_count(a.size(), k));
    return s;
}

/// Smallest C (to 3 significant figures, rounded up) for which the bound
/// holds on every sampled vector. Ties for the worst vector go to the lowest
/// index, so the result does not depend on `workers`.
inline CalibrationResult calibrate_constant(std::span<const FieldVector> sample, std::size_t k, double big_m, std::size_t workers = 1) {
    detail::require(!sample.empty(), "calibration sample is empty");
    const auto p = sample.front().prime().value();
    const auto n = sample.front().size();
    for (const auto& a : sample) {
        detail::require(a.prime().value() == p && a.size() == n, "calibration sample mixes moduli or lengths");
    }
    auto measured = parallel_map(sample.size(), workers, [&](std::size_t i) { return measure_for_calibration(sample[i], k, big_m); });
    CalibrationResult out;
    out.k = k;
    out.big_m = big_m;
    out.sample_size = sample.size();
    out.p = p;
    out.n = n;
    for (std::size_t i = 0; i < measured.size(); ++i) {
        if (measured[i].required_c > out.c_min_exact) {
            out.c_min_exact = measured[i].required_c;
            out.worst_index = i;
        }
    }
    out.c_min = round_up_3sf(out.c_min_exact);
    out.worst_vector = sample[out.worst_index];
    return out;
}

// ---------------------------------------------------------------------------
// Proof diagnostics: level sets, sumsets, cosine sums
// ---------------------------------------------------------------------------

/// Absolute guard applied to floating comparisons against level thresholds.
inline constexpr double level_guard = 1e-9;

/// sum_j ||r a_j / p||^2, where ||y|| is the distance to the nearest integer.
inline double torus_norm_sq_sum(const FieldVector& a, std::uint64_t r) {
    const auto p = a.prime().value();
    double s = 0;
    for (auto x : a.coords()) {
        const auto res = detail::mulmod(r, static_cast<std::uint64_t>(x), p);
        const auto nearest = std::min(res, p - res);
        const double d = static_cast<double>(nearest) / static_cast<double>(p);
        s += d * d;
    }
    return s;
}

struct LevelSet {
    double t = 0.0;
    std::vector<std::uint64_t> members;  // increasing

    bool contains(std::uint64_t r) const { return std::binary_search(members.begin(), members.end(), r); }
    std::size_t size() const noexcept { return members.size(); }
};

/// T_t = { r in F_p : sum_j ||r a_j / p||^2 <= t }.
inline LevelSet level_set(const FieldVector& a, double t) {
    detail::require(t >= 0, "level t must be nonnegative");
    LevelSet out{t, {}};
    for (std::uint64_t r = 0; r < a.prime().value(); ++r) {
        if (torus_norm_sq_sum(a, r) <= t + level_guard) out.members.push_back(r);
    }
    return out;
}

/// Checks |T_{m^2 t}| >= min{p, m |T_t| - m}.
inline bool sumset_inequality_check(const FieldVector& a, double t, std::size_t m_factor) {
    detail::require(m_factor >= 1, "sumset factor must be a positive integer");
    const auto p = a.prime().value();
    const auto base = level_set(a, t).size();
    const auto mf = static_cast<double>(m_factor);
    const auto grown = level_set(a, mf * mf * t).size();
    const auto lhs = static_cast<long double>(grown);
    const long double rhs = std::min<long double>(static_cast<long double>(p), static_cast<long double>(m_factor) * base - m_factor);
    return lhs >= rhs;
}

/// The m-fold sumset A + ... + A inside F_p.
inline std::vector<std::uint64_t> iterated_sumset(const std::vector<std::uint64_t>& set, std::size_t m, std::uint64_t p) {
    std::vector<char> cur(p, 0);
    cur[0] = 1;
    for (std::size_t step = 0; step < m; ++step) {
        std::vector<char> next(p, 0);
        for (std::uint64_t x = 0; x < p; ++x) {
            if (!cur[x]) continue;
            for (auto y : set) next[(x + y) % p] = 1;
        }
        cur = std::move(next);
    }
    std::vector<std::uint64_t> out;
    for (std::uint64_t x = 0; x < p; ++x) {
        if (cur[x]) out.push_back(x);
    }
    return out;
}

/// sum_j cos(2 pi r a_j / p)
inline double cosine_sum(const FieldVector& a, std::uint64_t r) {
    const auto p = a.prime().value();
    const double two_pi = 2.0 * std::acos(-1.0);
    double s = 0;
    for (auto x : a.coords()) {
        const auto res = detail::mulmod(r, static_cast<std::uint64_t>(x), p);
        s += std::cos(two_pi * static_cast<double>(res) / static_cast<double>(p));
    }
    return s;
}

/// T' = { r : sum_j cos(2 pi r a_j / p) >= threshold }.
inline std::vector<std::uint64_t> cosine_level_set(const FieldVector& a, double threshold) {
    std::vector<std::uint64_t> out;
    for (std::uint64_t r = 0; r < a.prime().value(); ++r) {
        if (cosine_sum(a, r) >= threshold - level_guard) out.push_back(r);
    }
    return out;
}

/// Whether T_{2M} lies inside { r : sum_j cos(2 pi r a_j / p) >= n - 40M }.
inline bool level_set_in_cosine_set(const FieldVector& a, double big_m) {
    const auto inner = level_set(a, 2.0 * big_m);
    const auto outer = cosine_level_set(a, static_cast<double>(a.size()) - 40.0 * big_m);
    return std::includes(outer.begin(), outer.end(), inner.members.begin(), inner.members.end());
}

/// R_k through the character sum (2^{2k}/p) sum_r (sum_j cos(2 pi r a_j/p))^{2k},
/// in double precision.
inline double fourier_rk(const FieldVector& a, std::size_t k) {
    const auto p = a.prime().value();
    double total = 0;
    for (std::uint64_t r = 0; r < p; ++r) total += std::pow(cosine_sum(a, r), 2.0 * static_cast<double>(k));
    return std::ldexp(total, static_cast<int>(2 * k)) / static_cast<double>(p);
}

} // namespace resil
