#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "random.hpp"

namespace resil {

/// An n x m matrix with entries in {+1, -1}.
///
/// Rows are bit-packed into 64-bit words, bit set <=> entry +1. Bits beyond
/// column m-1 in the last word of a row are always zero, so row-level
/// popcounts never need masking.
class SignMatrix {
public:
    using word_type = std::uint64_t;
    static constexpr std::size_t word_bits = 64;

    /// All-(+1) matrix.
    SignMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), words_per_row_((cols + word_bits - 1) / word_bits) {
        detail::require(rows >= 1 && cols >= 1, "matrix dimensions must be positive");
        bits_.assign(rows_ * words_per_row_, 0);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t w = 0; w < words_per_row_; ++w) bits_[i * words_per_row_ + w] = word_mask(w);
        }
    }

    /// From a row-major list of +1/-1 values.
    SignMatrix(std::size_t rows, std::size_t cols, std::span<const int> entries) : SignMatrix(rows, cols) {
        detail::require(entries.size() == rows * cols, "entry count does not match dimensions");
        for (std::size_t i = 0; i < rows; ++i) {
            for (std::size_t j = 0; j < cols; ++j) set(i, j, entries[i * cols + j]);
        }
    }

    SignMatrix(std::size_t rows, std::size_t cols, std::initializer_list<int> entries)
        : SignMatrix(rows, cols, std::span<const int>(entries.begin(), entries.size())) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t words_per_row() const noexcept { return words_per_row_; }

    int operator()(std::size_t i, std::size_t j) const noexcept {
        return (bits_[i * words_per_row_ + j / word_bits] >> (j % word_bits)) & 1U ? 1 : -1;
    }

    void set(std::size_t i, std::size_t j, int value) {
        detail::require(value == 1 || value == -1, "sign matrix entries must be +1 or -1");
        check_bounds(i, j);
        auto& w = bits_[i * words_per_row_ + j / word_bits];
        const word_type bit = word_type{1} << (j % word_bits);
        if (value == 1) w |= bit;
        else w &= ~bit;
    }

    void negate(std::size_t i, std::size_t j) {
        check_bounds(i, j);
        bits_[i * words_per_row_ + j / word_bits] ^= word_type{1} << (j % word_bits);
    }

    std::span<const word_type> row_words(std::size_t i) const noexcept {
        return {bits_.data() + i * words_per_row_, words_per_row_};
    }

    /// Number of columns where rows i and j disagree.
    std::size_t row_hamming(std::size_t i, std::size_t j) const noexcept {
        std::size_t d = 0;
        auto a = row_words(i), b = row_words(j);
        for (std::size_t w = 0; w < words_per_row_; ++w) d += std::popcount(a[w] ^ b[w]);
        return d;
    }

    std::vector<int> column(std::size_t j) const {
        std::vector<int> c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
        return c;
    }

    friend bool operator==(const SignMatrix&, const SignMatrix&) = default;

    /// Mask of valid bits for word w of a row.
    word_type word_mask(std::size_t w) const noexcept {
        const std::size_t used = std::min(word_bits, cols_ - w * word_bits);
        return used == word_bits ? ~word_type{0} : (word_type{1} << used) - 1;
    }

    /// Overwrite word w of row i; bits past the last column are dropped.
    void set_row_word(std::size_t i, std::size_t w, word_type value) noexcept {
        bits_[i * words_per_row_ + w] = value & word_mask(w);
    }

private:
    void check_bounds(std::size_t i, std::size_t j) const {
        if (i >= rows_ || j >= cols_) {
            throw precondition_error("position (" + std::to_string(i) + "," + std::to_string(j) + ") out of bounds for " +
                                     std::to_string(rows_) + "x" + std::to_string(cols_) + " matrix");
        }
    }

    std::size_t rows_;
    std::size_t cols_;
    std::size_t words_per_row_;
    std::vector<word_type> bits_;
};

struct Position {
    std::size_t row = 0;
    std::size_t col = 0;

    friend auto operator<=>(const Position&, const Position&) = default;
};

/// A set of distinct matrix positions, kept sorted row-major.
class FlipSet {
public:
    FlipSet() = default;

    explicit FlipSet(std::vector<Position> positions) : positions_(std::move(positions)) {
        std::sort(positions_.begin(), positions_.end());
        detail::require(std::adjacent_find(positions_.begin(), positions_.end()) == positions_.end(),
                        "flip set contains a duplicate position");
    }

    FlipSet(std::initializer_list<Position> positions) : FlipSet(std::vector<Position>(positions)) {}

    std::size_t size() const noexcept { return positions_.size(); }
    bool empty() const noexcept { return positions_.empty(); }
    auto begin() const noexcept { return positions_.begin(); }
    auto end() const noexcept { return positions_.end(); }
    const std::vector<Position>& positions() const noexcept { return positions_; }

    friend bool operator==(const FlipSet&, const FlipSet&) = default;

private:
    std::vector<Position> positions_;
};

/// Each entry is an independent uniform sign drawn from the stream of `seed`.
/// Row words are filled directly from 64-bit generator outputs in row-major
/// word order.
inline SignMatrix sample_matrix(std::size_t rows, std::size_t cols, const RandomSeed& seed) {
    SignMatrix m(rows, cols);
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t w = 0; w < m.words_per_row(); ++w) m.set_row_word(i, w, rng());
    }
    return m;
}

inline SignMatrix apply_flips(SignMatrix m, const FlipSet& flips) {
    for (const auto& p : flips) m.negate(p.row, p.col);
    return m;
}

/// Number of entries where the two matrices differ.
inline std::size_t distance(const SignMatrix& a, const SignMatrix& b) {
    detail::require(a.rows() == b.rows() && a.cols() == b.cols(), "distance requires matrices of equal dimensions");
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto x = a.row_words(i), y = b.row_words(i);
        for (std::size_t w = 0; w < x.size(); ++w) d += std::popcount(x[w] ^ y[w]);
    }
    return d;
}

// Text format: "n m\n" then n lines of m characters from {'+','-'}, each
// newline-terminated, nothing else.

inline std::string render(const SignMatrix& m) {
    std::string out = std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
    out.reserve(out.size() + m.rows() * (m.cols() + 1));
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) out.push_back(m(i, j) == 1 ? '+' : '-');
        out.push_back('\n');
    }
    return out;
}

namespace detail {

inline std::size_t parse_dimension(const std::string& s) {
    require(!s.empty() && s.size() <= 9 && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }),
            "matrix header must hold two positive decimal integers");
    require(s.size() == 1 || s[0] != '0', "matrix header dimension has a leading zero");
    return std::stoul(s);
}

} // namespace detail

/// Strict parser for the matrix text format.
inline SignMatrix parse_matrix(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        auto nl = text.find('\n', start);
        detail::require(nl != std::string::npos, "matrix text must be newline-terminated");
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    detail::require(!lines.empty(), "matrix text is empty");
    const auto& header = lines[0];
    auto space = header.find(' ');
    detail::require(space != std::string::npos && header.find(' ', space + 1) == std::string::npos,
                    "matrix header must be \"n m\"");
    const auto n = detail::parse_dimension(header.substr(0, space));
    const auto m = detail::parse_dimension(header.substr(space + 1));
    detail::require(n >= 1 && m >= 1, "matrix dimensions must be positive");
    detail::require(lines.size() == n + 1, "expected " + std::to_string(n) + " matrix rows, found " + std::to_string(lines.size() - 1));
    SignMatrix out(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = lines[i + 1];
        detail::require(row.size() == m, "row " + std::to_string(i) + " has " + std::to_string(row.size()) + " characters, expected " +
                                             std::to_string(m));
        for (std::size_t j = 0; j < m; ++j) {
            detail::require(row[j] == '+' || row[j] == '-', "row " + std::to_string(i) + " contains a character other than '+' or '-'");
            out.set(i, j, row[j] == '+' ? 1 : -1);
        }
    }
    return out;
}

inline SignMatrix read_matrix(std::istream& in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_matrix(buf.str());
}

inline std::ostream& operator<<(std::ostream& os, const SignMatrix& m) { return os << render(m); }

/// FNV-1a over the rendered text; used to identify matrices in trial records.
inline std::uint64_t matrix_hash(const SignMatrix& m) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : render(m)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace resil
