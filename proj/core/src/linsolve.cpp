#include "oblab/linsolve.hpp"

namespace oblab {

namespace {

// Reduced row echelon form in place; returns pivot column per pivot row.
std::vector<std::size_t> rref(RatMatrix& M) {
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < M.cols && row < M.rows; ++col) {
        std::size_t p = row;
        while (p < M.rows && M.at(p, col) == 0) ++p;
        if (p == M.rows) continue;
        for (std::size_t j = 0; j < M.cols; ++j) std::swap(M.at(p, j), M.at(row, j));
        Rational inv = 1 / M.at(row, col);
        for (std::size_t j = col; j < M.cols; ++j) M.at(row, j) *= inv;
        for (std::size_t i = 0; i < M.rows; ++i) {
            if (i == row || M.at(i, col) == 0) continue;
            Rational f = M.at(i, col);
            for (std::size_t j = col; j < M.cols; ++j) M.at(i, j) -= f * M.at(row, j);
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

}  // namespace

std::optional<std::vector<Rational>> solve_exact(RatMatrix A, std::vector<Rational> b) {
    std::size_t n = A.rows, m = A.cols;
    RatMatrix aug(n, m + 1);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) aug.at(i, j) = A.at(i, j);
        aug.at(i, m) = b[i];
    }
    auto pivots = rref(aug);
    // Inconsistent if a pivot lands in the rhs column.
    for (std::size_t r = 0; r < pivots.size(); ++r)
        if (pivots[r] == m) return std::nullopt;
    for (std::size_t i = pivots.size(); i < n; ++i)
        if (aug.at(i, m) != 0) return std::nullopt;
    std::vector<Rational> x(m, Rational(0));
    for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = aug.at(r, m);
    return x;
}

std::vector<std::vector<Rational>> nullspace_exact(RatMatrix A) {
    std::size_t m = A.cols;
    auto pivots = rref(A);
    std::vector<bool> is_pivot(m, false);
    for (auto c : pivots) is_pivot[c] = true;
    std::vector<std::vector<Rational>> basis;
    for (std::size_t freec = 0; freec < m; ++freec) {
        if (is_pivot[freec]) continue;
        std::vector<Rational> v(m, Rational(0));
        v[freec] = 1;
        for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -A.at(r, freec);
        basis.push_back(std::move(v));
    }
    return basis;
}

}  // namespace oblab
