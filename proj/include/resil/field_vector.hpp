#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numbers.hpp"
#include "random.hpp"

namespace resil {

/// A coefficient vector, either over the integers or over F_p.
///
/// With a modulus present every coordinate is stored reduced into [0, p).
class FieldVector {
public:
    static FieldVector over_integers(std::vector<std::int64_t> coords) {
        return FieldVector(std::nullopt, std::move(coords));
    }

    static FieldVector over_field(const PrimeModulus& p, std::vector<std::int64_t> coords) {
        for (auto& x : coords) x = static_cast<std::int64_t>(p.reduce(x));
        return FieldVector(p, std::move(coords));
    }

    std::size_t size() const noexcept { return coords_.size(); }
    std::int64_t operator[](std::size_t i) const noexcept { return coords_[i]; }
    const std::vector<std::int64_t>& coords() const noexcept { return coords_; }

    bool is_modular() const noexcept { return modulus_.has_value(); }
    const std::optional<PrimeModulus>& modulus() const noexcept { return modulus_; }

    const PrimeModulus& prime() const {
        detail::require(modulus_.has_value(), "operation requires a vector over F_p");
        return *modulus_;
    }

    std::vector<std::size_t> support() const {
        std::vector<std::size_t> s;
        for (std::size_t i = 0; i < coords_.size(); ++i) {
            if (coords_[i] != 0) s.push_back(i);
        }
        return s;
    }

    std::size_t support_size() const noexcept {
        std::size_t s = 0;
        for (auto x : coords_) s += x != 0;
        return s;
    }

    bool is_zero() const noexcept { return support_size() == 0; }

    friend bool operator==(const FieldVector&, const FieldVector&) = default;

private:
    FieldVector(std::optional<PrimeModulus> p, std::vector<std::int64_t> coords) : modulus_(p), coords_(std::move(coords)) {}

    std::optional<PrimeModulus> modulus_;
    std::vector<std::int64_t> coords_;
};

/// Uniform vector in F_p^n, or in (F_p \ {0})^n when full_support is set.
inline FieldVector sample_vector(const PrimeModulus& p, std::size_t n, SplitMix64& rng, bool full_support) {
    std::vector<std::int64_t> coords(n);
    for (auto& x : coords) {
        x = full_support ? static_cast<std::int64_t>(1 + rng.below(p.value() - 1)) : static_cast<std::int64_t>(rng.below(p.value()));
    }
    return FieldVector::over_field(p, std::move(coords));
}

/// The restriction a_I of a vector to an index set I, in increasing index order.
struct Subvector {
    FieldVector values;
    std::vector<std::size_t> indices;

    std::size_t size() const noexcept { return indices.size(); }
};

inline Subvector restrict(const FieldVector& a, std::vector<std::size_t> index_set) {
    std::sort(index_set.begin(), index_set.end());
    detail::require(std::adjacent_find(index_set.begin(), index_set.end()) == index_set.end(), "index set has duplicates");
    std::vector<std::int64_t> coords;
    coords.reserve(index_set.size());
    for (auto i : index_set) {
        detail::require(i < a.size(), "index " + std::to_string(i) + " out of range for vector of length " + std::to_string(a.size()));
        coords.push_back(a[i]);
    }
    auto values = a.is_modular() ? FieldVector::over_field(*a.modulus(), std::move(coords)) : FieldVector::over_integers(std::move(coords));
    return {std::move(values), std::move(index_set)};
}

/// Parses comma-separated decimal integers, e.g. "3,0,-1".
inline std::vector<std::int64_t> parse_csv_integers(const std::string& text) {
    std::vector<std::int64_t> out;
    std::size_t start = 0;
    detail::require(!text.empty(), "vector text is empty");
    while (true) {
        auto comma = text.find(',', start);
        auto token = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        std::size_t used = 0;
        std::int64_t value = 0;
        try {
            value = std::stoll(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        detail::require(!token.empty() && used == token.size() && token.find(' ') == std::string::npos,
                        "malformed vector entry '" + token + "'");
        out.push_back(value);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

inline FieldVector parse_vector(const std::string& text, std::optional<std::uint64_t> modulus) {
    auto coords = parse_csv_integers(text);
    if (modulus) return FieldVector::over_field(PrimeModulus(*modulus), std::move(coords));
    return FieldVector::over_integers(std::move(coords));
}

inline std::string render_vector(const FieldVector& a) {
    std::ostringstream os;
    for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
    return os.str();
}

} // namespace resil
