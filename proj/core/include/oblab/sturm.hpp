#pragma once

#include <vector>

#include "oblab/rational.hpp"

namespace oblab {

// Univariate polynomial over Q, coefficient of x^i at index i.
struct UniPoly {
    std::vector<Rational> c;

    int degree() const;
    bool is_zero() const { return degree() < 0; }
    void normalize();
    Rational eval(const Rational& x) const;
    UniPoly derivative() const;
};

UniPoly uni_gcd(UniPoly a, UniPoly b);

// All real roots of p in [lo, hi], isolated with Sturm sequences and refined
// by bisection to absolute width `width`. p == 0 is the caller's business.
std::vector<double> real_roots(const UniPoly& p, double lo, double hi, double width = 1e-12);

}  // namespace oblab
