#pragma once

#include <optional>
#include <vector>

#include "oblab/rational.hpp"

namespace oblab {

// Dense exact-rational matrix, row major.
struct RatMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<Rational> a;

    RatMatrix() = default;
    RatMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, Rational(0)) {}
    Rational& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    const Rational& at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

// Solves A x = b exactly by Gaussian elimination with nonzero pivoting.
// Returns nullopt when the system is singular or inconsistent.
std::optional<std::vector<Rational>> solve_exact(RatMatrix A, std::vector<Rational> b);

// Exact nullspace basis of A (columns of the returned vectors index A's cols).
std::vector<std::vector<Rational>> nullspace_exact(RatMatrix A);

}  // namespace oblab
