#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <numeric>

namespace oblab {

inline constexpr int kMaxDim = 8;

// Exponent multi-index of a monomial x^a. Only the first `dim` slots are used.
struct MultiIndex {
    std::array<std::uint8_t, kMaxDim> e{};

    int degree() const {
        int d = 0;
        for (auto x : e) d += x;
        return d;
    }

    int operator[](int i) const { return e[static_cast<std::size_t>(i)]; }
    void set(int i, int v) { e[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v); }

    bool operator==(const MultiIndex& o) const = default;
};

// Graded lexicographic: lower total degree first, then lexicographic.
struct GradedLex {
    bool operator()(const MultiIndex& a, const MultiIndex& b) const {
        int da = a.degree(), db = b.degree();
        if (da != db) return da < db;
        return a.e < b.e;
    }
};

}  // namespace oblab
