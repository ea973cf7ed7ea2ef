#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "oblab/homopoly.hpp"

namespace oblab::poly {

/// Floating-point multivariate polynomial. Carrier for the numeric pipeline
/// outputs (fitted blow-ups, rotated Taylor fields); the exact machinery stays
/// in HomoPoly/Poly.
class RealPoly {
  public:
    RealPoly() = default;
    explicit RealPoly(int dim) : dim_(dim) {}
    explicit RealPoly(const Poly& p);
    explicit RealPoly(const HomoPoly& h) : RealPoly(Poly(h)) {}

    static RealPoly constant(int dim, double c);
    static RealPoly monomial(int dim, const MultiIndex& a, double c);

    int dim() const { return dim_; }
    const std::map<MultiIndex, double, GradedLex>& terms() const { return terms_; }
    int max_degree() const { return terms_.empty() ? -1 : terms_.rbegin()->first.degree(); }
    bool is_zero() const { return terms_.empty(); }

    void add_term(const MultiIndex& a, double c);

    RealPoly operator+(const RealPoly& o) const;
    RealPoly operator-(const RealPoly& o) const;
    RealPoly operator*(double c) const;
    RealPoly operator*(const RealPoly& o) const;

    RealPoly partial(int axis) const;
    RealPoly derivative(const MultiIndex& alpha) const;  // d^alpha
    RealPoly homogeneous_part(int degree) const;
    RealPoly truncate(int degree) const;  // pi_{<=degree}

    double evaluate(const std::vector<double>& x) const;
    std::vector<double> gradient(const std::vector<double>& x) const;

    // Substitution x -> M x (columns of M are images of basis vectors).
    RealPoly compose_linear(const std::vector<std::vector<double>>& M) const;
    // p(x + shift)
    RealPoly shift(const std::vector<double>& s) const;

    // Drops |coeff| <= tol.
    RealPoly pruned(double tol) const;

    double coeff_norm() const;  // l2 of coefficients

    std::string to_text() const;

  private:
    int dim_ = 0;
    std::map<MultiIndex, double, GradedLex> terms_;
};

}  // namespace oblab::poly
