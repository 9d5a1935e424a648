#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numbers.hpp"
#include "parallel.hpp"
#include "rank.hpp"
#include "sign_matrix.hpp"

namespace resil {

/// Largest number of flip sets visited at one cardinality by the exact search.
inline constexpr std::uint64_t exact_level_budget = 100'000'000;
/// Largest number of column subsets scanned by the hyperplane bound.
inline constexpr std::uint64_t hyperplane_budget = 10'000'000;
/// Largest number of candidate kernel vectors tried by the sparse attack.
inline constexpr std::uint64_t kernel_attack_budget = 10'000'000;

namespace detail {

/// C(n, k), or cap + 1 once it exceeds cap.
inline std::uint64_t binomial_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
    if (k > n) return 0;
    k = std::min(k, n - k);
    unsigned __int128 v = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        v = v * (n - k + i) / i;
        if (v > cap) return cap + 1;
    }
    return static_cast<std::uint64_t>(v);
}

/// The combination of rank r (lexicographic order) among k-subsets of [0, n).
inline std::vector<std::size_t> unrank_combination(std::uint64_t n, std::uint64_t k, std::uint64_t r) {
    std::vector<std::size_t> out;
    out.reserve(k);
    std::uint64_t c = 0;
    for (std::uint64_t pos = 0; pos < k; ++pos) {
        while (true) {
            const auto below = binomial_capped(n - c - 1, k - pos - 1, std::numeric_limits<std::uint64_t>::max() - 1);
            if (r < below) break;
            r -= below;
            ++c;
        }
        out.push_back(static_cast<std::size_t>(c++));
    }
    return out;
}

/// Advances to the next k-subset of [0, n) in lexicographic order.
inline bool next_combination(std::vector<std::size_t>& c, std::size_t n) {
    const std::size_t k = c.size();
    std::size_t i = k;
    while (i > 0 && c[i - 1] == n - k + i - 1) --i;
    if (i == 0) return false;
    ++c[i - 1];
    for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
    return true;
}

inline void require_resilience_shape(const SignMatrix& m) {
    require(m.rows() >= 2, "resilience needs at least two rows");
}

} // namespace detail

struct ExactResilience {
    std::optional<std::size_t> value;  // absent when nothing within budget works
    FlipSet witness;
    bool budget_exhausted = false;
};

/// Minimum number of sign flips making rank < n, by trying every flip set of
/// size 0, 1, ..., budget. The witness is the lexicographically least flip set
/// of the minimum size (positions ordered row-major), independent of workers.
inline ExactResilience resilience_exact(const SignMatrix& m, std::size_t budget, std::size_t workers = 1) {
    detail::require_resilience_shape(m);
    const std::size_t n = m.rows();
    const std::size_t cells = m.rows() * m.cols();
    budget = std::min(budget, cells);
    // every level is checked before any search so an infeasible budget fails fast
    for (std::size_t s = 0; s <= budget; ++s) {
        if (detail::binomial_capped(cells, s, exact_level_budget) > exact_level_budget) {
            throw budget_exceeded("exact search at " + std::to_string(s) + " flips exceeds C(nm, s) <= 10^8");
        }
    }
    ExactResilience out;
    for (std::size_t s = 0; s <= budget; ++s) {
        const auto total = detail::binomial_capped(cells, s, exact_level_budget);
        const std::size_t chunks = workers <= 1 ? 1 : static_cast<std::size_t>(std::min<std::uint64_t>(total, workers * 8));
        std::atomic<std::size_t> first_hit{std::numeric_limits<std::size_t>::max()};
        auto found = parallel_map(chunks, workers, [&](std::size_t chunk) -> std::optional<std::vector<std::size_t>> {
            const std::uint64_t begin = total * chunk / chunks, end = total * (chunk + 1) / chunks;
            if (begin == end) return std::nullopt;
            auto combo = detail::unrank_combination(cells, s, begin);
            for (std::uint64_t r = begin; r < end; ++r) {
                if ((r & 255) == 0 && first_hit.load(std::memory_order_relaxed) < chunk) return std::nullopt;
                SignMatrix trial = m;
                for (auto cell : combo) trial.negate(cell / m.cols(), cell % m.cols());
                if (rank_exact(trial) < n) {
                    std::size_t cur = first_hit.load();
                    while (chunk < cur && !first_hit.compare_exchange_weak(cur, chunk)) {
                    }
                    return combo;
                }
                detail::next_combination(combo, cells);
            }
            return std::nullopt;
        });
        for (auto& hit : found) {
            if (!hit) continue;
            std::vector<Position> flips;
            for (auto cell : *hit) flips.push_back({cell / m.cols(), cell % m.cols()});
            out.value = s;
            out.witness = FlipSet(std::move(flips));
            return out;
        }
    }
    out.budget_exhausted = true;
    return out;
}

/// Certified lower bound m - Z*, where Z* is the largest number of columns
/// lying in one hyperplane. Any d flips leave at least m - d columns untouched,
/// and after a successful attack those all share a hyperplane. 0 when M is
/// already rank deficient.
inline std::size_t lower_bound_hyperplane(const SignMatrix& m) {
    detail::require_resilience_shape(m);
    const std::size_t n = m.rows(), cols = m.cols();
    if (rank_exact(m) < n) return 0;
    // rank n forces cols >= n; spans of (n-1)-subsets cover every hyperplane
    // that contains n-1 independent columns, and any other hyperplane's
    // column set sits inside one of those
    const auto total = detail::binomial_capped(cols, n - 1, hyperplane_budget);
    if (total > hyperplane_budget) {
        throw budget_exceeded("hyperplane bound needs C(m, n-1) <= 10^7 column subsets; use the attack upper bounds instead");
    }
    std::vector<std::size_t> subset(n - 1);
    for (std::size_t i = 0; i < subset.size(); ++i) subset[i] = i;
    std::size_t best = 0;
    do {
        const auto base = rank_of_columns(m, subset);
        std::vector<std::size_t> extended = subset;
        extended.push_back(0);
        std::size_t inside = 0;
        for (std::size_t c = 0; c < cols; ++c) {
            extended.back() = c;
            inside += rank_of_columns(m, extended) == base;
        }
        best = std::max(best, inside);
    } while (detail::next_combination(subset, cols));
    return cols - best;
}

struct RowPairAttack {
    std::size_t cost = 0;
    FlipSet flips;
    std::size_t row_i = 0;  // the edited row
    std::size_t row_j = 0;
};

/// Make some row equal to, or the negative of, another by editing row i.
/// Ties go to the first pair (i, j) in lexicographic order.
inline RowPairAttack upper_bound_row_pairs(const SignMatrix& m) {
    detail::require_resilience_shape(m);
    RowPairAttack best;
    best.cost = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = i + 1; j < m.rows(); ++j) {
            const std::size_t d = m.row_hamming(i, j);
            const std::size_t cost = std::min(d, m.cols() - d);
            if (cost < best.cost) best = {cost, {}, i, j};
        }
    }
    const std::size_t d = m.row_hamming(best.row_i, best.row_j);
    const bool make_equal = d <= m.cols() - d;
    std::vector<Position> flips;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        const bool agree = m(best.row_i, c) == m(best.row_j, c);
        if (agree != make_equal) flips.push_back({best.row_i, c});
    }
    best.flips = FlipSet(std::move(flips));
    return best;
}

struct ColumnFix {
    std::size_t cost = 0;
    std::vector<std::size_t> rows;  // entries of the column to negate
};

/// Fewest entries of `column` to negate so that a . column becomes 0.
/// Negating entry i shifts the product by -2 a_i column_i, so this is a
/// minimum-size subset of {a_i column_i} summing to (a . column) / 2.
/// Empty when no subset attains it.
inline std::optional<ColumnFix> column_fix_cost(const std::vector<Rational>& a, const std::vector<int>& column) {
    detail::require(a.size() == column.size(), "kernel vector and column lengths differ");
    detail::require(std::any_of(a.begin(), a.end(), [](const Rational& x) { return x != 0; }), "kernel vector must be nonzero");
    Rational dot = 0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * column[i];
    if (dot == 0) return ColumnFix{};
    const Rational target = dot / 2;
    // reachable sum -> fewest rows reaching it (first found wins ties)
    std::map<Rational, std::vector<std::size_t>> reach{{Rational(0), {}}};
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        const Rational v = a[i] * column[i];
        auto next = reach;
        for (const auto& [sum, rows] : reach) {
            auto extended = rows;
            extended.push_back(i);
            auto [it, inserted] = next.try_emplace(sum + v, extended);
            if (!inserted && extended.size() < it->second.size()) it->second = std::move(extended);
        }
        reach = std::move(next);
    }
    auto it = reach.find(target);
    if (it == reach.end()) return std::nullopt;
    return ColumnFix{it->second.size(), it->second};
}

struct AttackWitness {
    std::vector<Rational> kernel_vector;
    FlipSet flips;
    std::vector<std::size_t> per_column_costs;
};

/// Exact check that a^T M' = 0 for M' = M with the witness flips applied.
inline bool verify_attack(const SignMatrix& m, const AttackWitness& w) {
    if (w.kernel_vector.size() != m.rows()) return false;
    if (std::all_of(w.kernel_vector.begin(), w.kernel_vector.end(), [](const Rational& x) { return x == 0; })) return false;
    std::size_t total = 0;
    for (auto c : w.per_column_costs) total += c;
    if (total != w.flips.size()) return false;
    const auto flipped = apply_flips(m, w.flips);
    for (std::size_t c = 0; c < m.cols(); ++c) {
        Rational dot = 0;
        for (std::size_t r = 0; r < m.rows(); ++r) dot += w.kernel_vector[r] * flipped(r, c);
        if (dot != 0) return false;
    }
    return true;
}

struct KernelAttack {
    std::size_t cost = 0;
    AttackWitness witness;
};

inline std::vector<Rational> default_coefficients() { return {Rational(1), Rational(-1), Rational(2), Rational(-2)}; }

/// Best attack through a kernel vector with at most `support_limit` nonzero
/// coefficients drawn from `coeff_set`: each column is repaired independently
/// at its column_fix_cost. Candidates run by support size, then support
/// (lexicographic), then coefficients in the given order; the first cheapest
/// wins. Empty when no candidate is feasible.
inline std::optional<KernelAttack> upper_bound_sparse_kernel(const SignMatrix& m, std::size_t support_limit = 3,
                                                             const std::vector<Rational>& coeff_set = default_coefficients()) {
    detail::require_resilience_shape(m);
    const std::size_t n = m.rows();
    detail::require(support_limit >= 1 && support_limit <= n, "support limit must lie in [1, n]");
    detail::require(!coeff_set.empty(), "coefficient set is empty");
    for (const auto& c : coeff_set) detail::require(c != 0, "coefficients must be nonzero");

    std::uint64_t total = 0;
    for (std::size_t s = 1; s <= support_limit; ++s) {
        std::uint64_t term = detail::binomial_capped(n, s, kernel_attack_budget);
        for (std::size_t e = 0; e < s && term <= kernel_attack_budget; ++e) term *= coeff_set.size();
        total += term;
        if (total > kernel_attack_budget) throw budget_exceeded("sparse kernel attack exceeds 10^7 candidate vectors");
    }

    std::vector<std::vector<int>> columns;
    for (std::size_t c = 0; c < m.cols(); ++c) columns.push_back(m.column(c));

    std::optional<KernelAttack> best;
    for (std::size_t s = 1; s <= support_limit; ++s) {
        std::vector<std::size_t> support(s);
        for (std::size_t i = 0; i < s; ++i) support[i] = i;
        do {
            std::vector<std::size_t> choice(s, 0);
            while (true) {
                std::vector<Rational> a(n, Rational(0));
                for (std::size_t i = 0; i < s; ++i) a[support[i]] = coeff_set[choice[i]];
                std::size_t cost = 0;
                std::vector<std::size_t> per_column;
                std::vector<Position> flips;
                bool feasible = true;
                for (std::size_t c = 0; c < columns.size() && feasible; ++c) {
                    auto fix = column_fix_cost(a, columns[c]);
                    feasible = fix.has_value() && (!best || cost + fix->cost < best->cost);
                    if (!feasible) break;
                    cost += fix->cost;
                    per_column.push_back(fix->cost);
                    for (auto r : fix->rows) flips.push_back({r, c});
                }
                if (feasible) best = KernelAttack{cost, {std::move(a), FlipSet(std::move(flips)), std::move(per_column)}};
                std::size_t pos = s;
                while (pos > 0 && ++choice[pos - 1] == coeff_set.size()) choice[--pos] = 0;
                if (pos == 0) break;
            }
        } while (detail::next_combination(support, n));
    }
    return best;
}

// ---------------------------------------------------------------------------
// Combined report
// ---------------------------------------------------------------------------

struct ResilienceOptions {
    bool exact = false;
    std::optional<std::size_t> budget;  // defaults to floor(m/2)
    bool attacks = true;
    bool hyperplane_lb = true;
    std::size_t support_limit = 3;
    std::vector<Rational> coeff_set = default_coefficients();
    std::size_t workers = 1;
};

struct ResilienceReport {
    std::size_t n = 0;
    std::size_t m = 0;
    std::optional<std::size_t> exact;
    FlipSet exact_witness;
    std::size_t lower_bound = 0;
    std::string lb_kind;  // rank_deficient | hyperplane | trivial
    std::size_t upper_bound = 0;
    std::string ub_kind;  // rank_deficient | row_pairs | sparse_kernel
    FlipSet upper_witness;
    std::optional<AttackWitness> kernel_witness;
    bool budget_exhausted = false;
};

inline ResilienceReport resilience_report(const SignMatrix& m, const ResilienceOptions& opt = {}) {
    detail::require_resilience_shape(m);
    ResilienceReport r;
    r.n = m.rows();
    r.m = m.cols();
    const bool deficient = rank_exact(m) < m.rows();
    if (deficient) {
        r.lb_kind = r.ub_kind = "rank_deficient";
    } else {
        r.lb_kind = "trivial";
        if (opt.hyperplane_lb) {
            try {
                r.lower_bound = lower_bound_hyperplane(m);
                r.lb_kind = "hyperplane";
            } catch (const budget_exceeded&) {
                // keep the trivial bound
            }
        }
        auto pairs = upper_bound_row_pairs(m);
        r.upper_bound = pairs.cost;
        r.ub_kind = "row_pairs";
        r.upper_witness = pairs.flips;
        if (opt.attacks) {
            const auto limit = std::min(opt.support_limit, m.rows());
            if (auto k = upper_bound_sparse_kernel(m, limit, opt.coeff_set); k && k->cost < r.upper_bound) {
                r.upper_bound = k->cost;
                r.ub_kind = "sparse_kernel";
                r.upper_witness = k->witness.flips;
                r.kernel_witness = std::move(k->witness);
            }
        }
    }
    if (opt.exact) {
        auto e = resilience_exact(m, opt.budget.value_or(m.cols() / 2), opt.workers);
        r.exact = e.value;
        r.exact_witness = std::move(e.witness);
        r.budget_exhausted = e.budget_exhausted;
    }
    return r;
}

} // namespace resil
