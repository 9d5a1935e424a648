#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "anticoncentration.hpp"
#include "errors.hpp"
#include "field_vector.hpp"
#include "halasz.hpp"
#include "numbers.hpp"
#include "parallel.hpp"

namespace resil {

/// Parameters of the goodness classification.
///
/// `support_threshold` stands in for n^{1 - eps/2}: at desk scale that power
/// is indistinguishable from n, so the threshold is supplied directly.
/// `epsilon` is only read by the small-ball bound.
struct GoodnessParams {
    PrimeModulus p{3};
    std::size_t k = 1;
    Rational alpha{1, 2};
    std::size_t support_threshold = 1;
    Rational epsilon{1, 200};
};

enum class GoodnessMode { exact, heuristic };

/// Largest n accepted by exact mode (2^n subvectors are scanned).
inline constexpr std::size_t exact_goodness_limit = 20;

/// h(a) and its witness. h = infinity (empty optional) exactly when the
/// support is below the threshold. In heuristic mode h is an upper bound.
struct GoodnessReport {
    std::optional<Rational> h;
    std::optional<Subvector> witness;
    bool upper_bound_only = false;

    bool is_t_good(const Rational& t) const { return h.has_value() && *h <= t; }
};

inline void validate(const GoodnessParams& params, std::size_t n) {
    detail::require(params.k >= 1, "k must be positive");
    detail::require(params.alpha > 0 && params.alpha < 1, "alpha must lie in (0, 1)");
    detail::require(params.support_threshold >= 1 && params.support_threshold <= n, "support threshold must lie in [1, n]");
    detail::require(params.epsilon > 0 && params.epsilon < Rational(1, 100), "epsilon must lie in (0, 1/100)");
}

namespace detail {

/// Memoized R_k^alpha. The count only depends on the multiset of coordinates
/// up to sign, so that multiset (sorted representatives min(x, p-x)) is the key.
class RkaMemo {
public:
    RkaMemo(const PrimeModulus& p, std::size_t k, Rational alpha) : p_(p), k_(k), alpha_(std::move(alpha)) {}

    const BigInt& operator()(const FieldVector& b) {
        std::vector<std::int64_t> key(b.coords());
        for (auto& x : key) x = std::min<std::int64_t>(x, static_cast<std::int64_t>(p_.negate(static_cast<std::uint64_t>(x))));
        std::sort(key.begin(), key.end());
        auto it = cache_.find(key);
        if (it == cache_.end()) it = cache_.emplace(key, count_rk_alpha(b, k_, alpha_).value).first;
        return it->second;
    }

private:
    PrimeModulus p_;
    std::size_t k_;
    Rational alpha_;
    std::map<std::vector<std::int64_t>, BigInt> cache_;
};

/// p R / (2^{2k} |b|^{2k})
inline Rational goodness_ratio(std::uint64_t p, const BigInt& rka, std::size_t length, std::size_t k) {
    BigInt denom = boost::multiprecision::pow(BigInt(2 * length), static_cast<unsigned>(2 * k));
    return Rational(BigInt(p) * rka, denom);
}

inline std::vector<std::size_t> mask_indices(std::uint64_t mask) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; mask; ++i, mask >>= 1) {
        if (mask & 1) out.push_back(i);
    }
    return out;
}

inline GoodnessReport exact_goodness(const FieldVector& a, const GoodnessParams& params, RkaMemo& memo) {
    GoodnessReport report;
    if (a.support_size() < params.support_threshold) return report;
    const std::size_t n = a.size();
    std::uint64_t best_mask = 0;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
        std::size_t supp = 0;
        for (std::size_t i = 0; i < n; ++i) supp += (mask >> i & 1) && a[i] != 0;
        if (supp < params.support_threshold) continue;
        auto sub = restrict(a, mask_indices(mask));
        auto ratio = goodness_ratio(params.p.value(), memo(sub.values), sub.size(), params.k);
        if (!report.h || ratio < *report.h) {
            report.h = std::move(ratio);
            best_mask = mask;
        }
    }
    report.witness = restrict(a, mask_indices(best_mask));
    return report;
}

/// Candidate index sets for heuristic mode: the whole vector, its support,
/// and for each s the union of the s most frequent value classes (x ~ -x)
/// and the support with those classes removed.
inline std::vector<std::vector<std::size_t>> heuristic_candidates(const FieldVector& a) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> all(a.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    out.push_back(all);
    const auto supp = a.support();
    out.push_back(supp);

    const auto& p = a.prime();
    std::map<std::uint64_t, std::vector<std::size_t>> by_class;
    for (auto i : supp) {
        const auto x = static_cast<std::uint64_t>(a[i]);
        by_class[std::min(x, p.negate(x))].push_back(i);
    }
    std::vector<std::vector<std::size_t>> classes;
    for (auto& [key, members] : by_class) classes.push_back(members);
    std::stable_sort(classes.begin(), classes.end(), [](const auto& l, const auto& r) { return l.size() > r.size(); });

    for (std::size_t s = 1; s <= classes.size(); ++s) {
        std::vector<std::size_t> heavy, light;
        for (std::size_t c = 0; c < classes.size(); ++c) {
            auto& dst = c < s ? heavy : light;
            dst.insert(dst.end(), classes[c].begin(), classes[c].end());
        }
        std::sort(heavy.begin(), heavy.end());
        std::sort(light.begin(), light.end());
        out.push_back(heavy);
        if (!light.empty()) out.push_back(light);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline GoodnessReport heuristic_goodness(const FieldVector& a, const GoodnessParams& params, RkaMemo& memo) {
    GoodnessReport report;
    report.upper_bound_only = true;
    if (a.support_size() < params.support_threshold) return report;
    for (auto& indices : heuristic_candidates(a)) {
        auto sub = restrict(a, indices);
        if (sub.values.support_size() < params.support_threshold) continue;
        auto ratio = goodness_ratio(params.p.value(), memo(sub.values), sub.size(), params.k);
        if (!report.h || ratio < *report.h) {
            report.h = std::move(ratio);
            report.witness = std::move(sub);
        }
    }
    return report;
}

} // namespace detail

/// h(a) = min over subvectors b with |supp(b)| >= threshold of
/// p R_k^alpha(b) / (2^{2k} |b|^{2k}).
inline GoodnessReport goodness(const FieldVector& a, const GoodnessParams& params, GoodnessMode mode) {
    detail::require(a.is_modular() && a.prime() == params.p, "vector modulus does not match goodness parameters");
    validate(params, a.size());
    detail::RkaMemo memo(params.p, params.k, params.alpha);
    if (mode == GoodnessMode::exact) {
        detail::require(a.size() <= exact_goodness_limit,
                        "exact goodness is limited to n <= " + std::to_string(exact_goodness_limit) + "; use heuristic mode");
        return detail::exact_goodness(a, params, memo);
    }
    return detail::heuristic_goodness(a, params, memo);
}

// ---------------------------------------------------------------------------
// Small-ball bound for t-good vectors
// ---------------------------------------------------------------------------

/// C t / (p n^{(1/2)(1 - 5 eps / 6)})
inline double smallball_bound_value(std::uint64_t p, std::size_t n, const Rational& epsilon, double t, double c) {
    const double exponent = 0.5 * (1.0 - 5.0 * to_double(epsilon) / 6.0);
    return c * t / (static_cast<double>(p) * std::pow(static_cast<double>(n), exponent));
}

/// Requires a in H_t, established by exact goodness when n is small enough
/// and by the heuristic upper bound otherwise.
inline double smallball_bound(const FieldVector& a, const GoodnessParams& params, double t, double c) {
    detail::require(t >= static_cast<double>(a.size()), "small-ball bound requires t >= n");
    const auto mode = a.size() <= exact_goodness_limit ? GoodnessMode::exact : GoodnessMode::heuristic;
    const auto report = goodness(a, params, mode);
    // compare h <= t exactly; t is a double so its binary value is exact
    detail::require(report.h && *report.h <= Rational(t), "vector is not established as t-good for t = " + std::to_string(t));
    return smallball_bound_value(params.p.value(), a.size(), params.epsilon, t, c);
}

struct SmallballCalibration {
    double c_min = 0.0;  // rounded up to 3 significant figures
    double c_min_exact = 0.0;
    std::size_t worst_index = 0;
};

/// Smallest C with rho(a) <= smallball_bound(a, t) over the sample, taking
/// t = max(n, h(a)) for each vector.
inline SmallballCalibration calibrate_smallball_constant(std::span<const FieldVector> sample, const GoodnessParams& params,
                                                         std::size_t workers = 1) {
    detail::require(!sample.empty(), "calibration sample is empty");
    auto required = parallel_map(sample.size(), workers, [&](std::size_t i) {
        const auto& a = sample[i];
        const auto mode = a.size() <= exact_goodness_limit ? GoodnessMode::exact : GoodnessMode::heuristic;
        const auto report = goodness(a, params, mode);
        detail::require(report.h.has_value(), "calibration vector has support below the threshold");
        const double t = std::max(static_cast<double>(a.size()), to_double(*report.h));
        return to_double(rho(a)) / smallball_bound_value(params.p.value(), a.size(), params.epsilon, t, 1.0);
    });
    SmallballCalibration out;
    for (std::size_t i = 0; i < required.size(); ++i) {
        if (required[i] > out.c_min_exact) {
            out.c_min_exact = required[i];
            out.worst_index = i;
        }
    }
    out.c_min = round_up_3sf(out.c_min_exact);
    return out;
}

// ---------------------------------------------------------------------------
// Counting lemma: bad sets and their size bounds
// ---------------------------------------------------------------------------

struct BadSetParams {
    std::size_t n = 1;
    std::uint64_t p = 3;
    std::size_t k = 1;
    std::size_t s = 1;
    std::uint64_t t = 1;
    Rational alpha{1, 2};
};

/// t is normally confined to [1, p]; enumeration also accepts t > p, where
/// the membership condition is unsatisfiable for every qualifying subvector.
inline void validate(const BadSetParams& params, bool allow_t_above_p = false) {
    PrimeModulus{params.p};
    detail::require(params.n >= 1, "n must be positive");
    detail::require(params.k >= 1, "k must be positive");
    detail::require(params.s >= 1 && params.s <= params.n, "s must lie in [1, n]");
    detail::require(params.t >= 1 && (allow_t_above_p || params.t <= params.p), "t must lie in [1, p]");
    detail::require(params.alpha > 0 && params.alpha < 1, "alpha must lie in (0, 1)");
}

/// (s/n)^{2k-1} (alpha t)^{s-n} p^n as an exact rational.
inline Rational counting_lemma_bound_exact(const BadSetParams& params) {
    validate(params);
    const Rational ratio(BigInt(params.s), BigInt(params.n));
    const Rational at = params.alpha * Rational(BigInt(params.t));
    Rational v = 1;
    for (std::size_t i = 0; i + 1 < 2 * params.k; ++i) v *= ratio;
    for (std::size_t i = params.s; i < params.n; ++i) v /= at;
    v *= Rational(boost::multiprecision::pow(BigInt(params.p), static_cast<unsigned>(params.n)));
    return v;
}

/// (s/n)^{2k-1} (alpha t)^{s-n} p^n in double precision; exact up to
/// rounding when p^n is moderate, log space beyond that.
inline double counting_lemma_bound(const BadSetParams& params) {
    validate(params);
    const double n = static_cast<double>(params.n), s = static_cast<double>(params.s);
    if (n * std::log2(static_cast<double>(params.p)) < 900) return to_double(counting_lemma_bound_exact(params));
    const double log_bound = (2.0 * static_cast<double>(params.k) - 1.0) * std::log(s / n) +
                             (s - n) * std::log(to_double(params.alpha) * static_cast<double>(params.t)) +
                             n * std::log(static_cast<double>(params.p));
    return std::exp(log_bound);
}

/// Which subvectors the bad-set condition ranges over: |b| >= s (as the
/// counting lemma states it) or |supp(b)| >= s (the goodness reading).
enum class SubvectorRule { length, support };

/// Largest p^n that enumeration will visit.
inline constexpr std::uint64_t bad_set_budget = 1'000'000;

namespace detail {

inline std::uint64_t checked_power(std::uint64_t base, std::size_t exp, std::uint64_t cap) {
    std::uint64_t v = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (v > cap / base) return cap + 1;
        v *= base;
    }
    return v;
}

/// Vector number `index` in lexicographic order (first coordinate most significant).
inline FieldVector vector_at(const PrimeModulus& p, std::size_t n, std::uint64_t index) {
    std::vector<std::int64_t> coords(n);
    for (std::size_t i = n; i-- > 0;) {
        coords[i] = static_cast<std::int64_t>(index % p.value());
        index /= p.value();
    }
    return FieldVector::over_field(p, std::move(coords));
}

inline bool is_bad(const FieldVector& a, const BadSetParams& params, SubvectorRule rule, RkaMemo& memo) {
    const std::size_t n = a.size();
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
        auto sub = restrict(a, mask_indices(mask));
        const std::size_t measure = rule == SubvectorRule::length ? sub.size() : sub.values.support_size();
        if (measure < params.s) continue;
        // R^alpha(b) >= t 2^{2k} |b|^{2k} / p, cross-multiplied
        const BigInt lhs = BigInt(params.p) * memo(sub.values);
        const BigInt rhs = BigInt(params.t) * boost::multiprecision::pow(BigInt(2 * sub.size()), static_cast<unsigned>(2 * params.k));
        if (lhs < rhs) return false;
    }
    return true;
}

} // namespace detail

/// Every a in F_p^n whose subvectors selected by `rule` all satisfy
/// R_k^alpha(b) >= t 2^{2k} |b|^{2k} / p. Lexicographic order regardless of
/// worker count.
inline std::vector<FieldVector> enumerate_bad_set(const BadSetParams& params, SubvectorRule rule = SubvectorRule::length,
                                                  std::size_t workers = 1) {
    validate(params, true);
    detail::require(params.n < 64, "n too large for subvector enumeration");
    const auto total = detail::checked_power(params.p, params.n, bad_set_budget);
    if (total > bad_set_budget) throw budget_exceeded("bad-set enumeration needs p^n <= 10^6");
    const PrimeModulus p(params.p);
    const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(workers, total));
    auto parts = parallel_map(chunks, workers, [&](std::size_t c) {
        detail::RkaMemo memo(p, params.k, params.alpha);
        std::vector<FieldVector> found;
        const std::uint64_t begin = total * c / chunks, end = total * (c + 1) / chunks;
        for (std::uint64_t idx = begin; idx < end; ++idx) {
            auto a = detail::vector_at(p, params.n, idx);
            if (detail::is_bad(a, params, rule, memo)) found.push_back(std::move(a));
        }
        return found;
    });
    std::vector<FieldVector> out;
    for (auto& part : parts) out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    return out;
}

struct BadSetReport {
    BadSetParams params;
    std::size_t exact_count = 0;
    double bound = 0.0;
    bool pass = false;
};

inline BadSetReport verify_counting_lemma(const BadSetParams& params, SubvectorRule rule = SubvectorRule::length, std::size_t workers = 1) {
    BadSetReport r;
    r.params = params;
    r.exact_count = enumerate_bad_set(params, rule, workers).size();
    r.bound = counting_lemma_bound(params);
    // compared exactly so a count equal to the bound never fails on rounding
    r.pass = Rational(BigInt(r.exact_count)) <= counting_lemma_bound_exact(params);
    return r;
}

/// 2^n (p / (alpha t))^n t^{threshold}, falling back to log space on overflow; the support
/// threshold plays the role of n^{1 - eps/2}.
inline double counting_bad_bound(std::size_t n, double t, const GoodnessParams& params) {
    detail::require(t >= static_cast<double>(n), "counting bound requires t >= n");
    detail::require(params.alpha > 0 && params.alpha < 1, "alpha must lie in (0, 1)");
    const double dn = static_cast<double>(n);
    const double direct = std::pow(2.0 * static_cast<double>(params.p.value()) / (to_double(params.alpha) * t), dn) *
                          std::pow(t, static_cast<double>(params.support_threshold));
    if (std::isfinite(direct)) return direct;
    const double log_bound = dn * std::log(2.0) + dn * std::log(static_cast<double>(params.p.value()) / (to_double(params.alpha) * t)) +
                             static_cast<double>(params.support_threshold) * std::log(t);
    return std::exp(log_bound);
}

/// Exhaustive |{a in F_p^n : |supp(a)| >= threshold and a not in H_t}|.
inline std::size_t count_non_good_vectors(std::size_t n, const Rational& t, const GoodnessParams& params) {
    validate(params, n);
    detail::require(n <= exact_goodness_limit, "exhaustive goodness count needs n <= " + std::to_string(exact_goodness_limit));
    const auto total = detail::checked_power(params.p.value(), n, bad_set_budget);
    if (total > bad_set_budget) throw budget_exceeded("exhaustive goodness count needs p^n <= 10^6");
    detail::RkaMemo memo(params.p, params.k, params.alpha);
    std::size_t count = 0;
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        auto a = detail::vector_at(params.p, n, idx);
        if (a.support_size() < params.support_threshold) continue;
        if (!detail::exact_goodness(a, params, memo).is_t_good(t)) ++count;
    }
    return count;
}

} // namespace resil
