#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "numbers.hpp"
#include "sign_matrix.hpp"

namespace resil {

/// Dense row-major integer matrix used as elimination scratch space.
template <typename T>
struct IntMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> data;

    IntMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

    T& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

/// Rank by fraction-free (Bareiss) elimination. Works in place.
///
/// Every intermediate value is a minor of the input, and every division is
/// exact. With T a fixed-width type the caller must ensure that twice the
/// square of the largest possible minor fits in T.
template <typename T>
std::size_t bareiss_rank(IntMatrix<T>& a) {
    std::size_t rank = 0;
    T prev_pivot = 1;
    for (std::size_t col = 0; col < a.cols && rank < a.rows; ++col) {
        std::size_t pivot = rank;
        while (pivot < a.rows && a(pivot, col) == 0) ++pivot;
        if (pivot == a.rows) continue;
        if (pivot != rank) {
            for (std::size_t j = 0; j < a.cols; ++j) std::swap(a(pivot, j), a(rank, j));
        }
        const T piv = a(rank, col);
        for (std::size_t i = rank + 1; i < a.rows; ++i) {
            const T lead = a(i, col);
            for (std::size_t j = col + 1; j < a.cols; ++j) {
                a(i, j) = (piv * a(i, j) - lead * a(rank, j)) / prev_pivot;
            }
            a(i, col) = 0;
        }
        prev_pivot = piv;
        ++rank;
    }
    return rank;
}

namespace detail {

template <typename T, typename Source>
IntMatrix<T> copy_matrix(const Source& src, std::size_t rows, std::size_t cols) {
    IntMatrix<T> out(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) out(i, j) = T(src(i, j));
    }
    return out;
}

// Largest matrix order for which Bareiss on +-1 entries stays within a fixed
// width. Minors of order r are bounded by r^(r/2) (Hadamard), and each step
// forms a difference of two products of such minors, so 2 * r^r must fit.
inline constexpr std::size_t max_order_int64 = 15;   // 2 * 15^15 < 2^63
inline constexpr std::size_t max_order_int128 = 26;  // 2 * 26^26 < 2^127

template <typename Source>
std::size_t rank_of_pm1(const Source& src, std::size_t rows, std::size_t cols) {
    const std::size_t order = std::min(rows, cols);
    if (order <= max_order_int64) {
        auto a = copy_matrix<std::int64_t>(src, rows, cols);
        return bareiss_rank(a);
    }
    if (order <= max_order_int128) {
        auto a = copy_matrix<__int128>(src, rows, cols);
        return bareiss_rank(a);
    }
    auto a = copy_matrix<BigInt>(src, rows, cols);
    return bareiss_rank(a);
}

} // namespace detail

/// Rank over the rationals, exact. No floating point is involved.
inline std::size_t rank_exact(const SignMatrix& m) {
    return detail::rank_of_pm1(m, m.rows(), m.cols());
}

/// Rank over Q of an arbitrary integer matrix.
inline std::size_t rank_exact(const IntMatrix<BigInt>& m) {
    auto a = m;
    return bareiss_rank(a);
}

/// Rank of the submatrix formed by the given columns of a sign matrix.
inline std::size_t rank_of_columns(const SignMatrix& m, std::span<const std::size_t> cols) {
    if (cols.empty()) return 0;
    struct ColumnView {
        const SignMatrix& m;
        std::span<const std::size_t> cols;
        int operator()(std::size_t i, std::size_t j) const { return m(i, cols[j]); }
    };
    return detail::rank_of_pm1(ColumnView{m, cols}, m.rows(), cols.size());
}

/// Rank over F_p by Gaussian elimination with modular inverses.
inline std::size_t rank_mod_p(const SignMatrix& m, std::uint64_t p) {
    const PrimeModulus mod(p);
    IntMatrix<std::uint64_t> a(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) a(i, j) = m(i, j) == 1 ? 1 : p - 1;
    }
    std::size_t rank = 0;
    for (std::size_t col = 0; col < a.cols && rank < a.rows; ++col) {
        std::size_t pivot = rank;
        while (pivot < a.rows && a(pivot, col) == 0) ++pivot;
        if (pivot == a.rows) continue;
        if (pivot != rank) {
            for (std::size_t j = 0; j < a.cols; ++j) std::swap(a(pivot, j), a(rank, j));
        }
        const auto inv = detail::powmod(a(rank, col), p - 2, p);
        for (std::size_t i = rank + 1; i < a.rows; ++i) {
            if (a(i, col) == 0) continue;
            const auto factor = detail::mulmod(a(i, col), inv, p);
            for (std::size_t j = col; j < a.cols; ++j) {
                const auto sub = detail::mulmod(factor, a(rank, j), p);
                a(i, j) = a(i, j) >= sub ? a(i, j) - sub : a(i, j) + p - sub;
            }
        }
        ++rank;
    }
    return rank;
}

} // namespace resil
