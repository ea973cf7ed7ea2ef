#pragma once

#include "oblab/homopoly.hpp"

namespace oblab::poly {

// L2(dB_1) pairing, normalized so that <1,1> = |dB_1|. `per_area` is the exact
// rational multiple of the sphere area, `value` the floating-point integral.
struct SphereInner {
    Rational per_area;
    double value = 0.0;
};

// Exact monomial moment over the unit sphere as a multiple of |dB_1|:
// zero when any exponent is odd. Cached per (dim, alpha).
Rational sphere_moment_per_area(int dim, const MultiIndex& alpha);

double sphere_area(int dim);  // |S^{n-1}|

SphereInner sphere_inner(const Poly& p, const Poly& q);
SphereInner sphere_inner(const HomoPoly& p, const HomoPoly& q);

}  // namespace oblab::poly
