#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oblab/homopoly.hpp"

namespace oblab::ansatz {

using poly::AxisDir;
using poly::HomoPoly;
using poly::Poly;

// Taylor data of the right-hand side f at the expansion center, in centered
// coordinates. The constant term is f(x0) and must be positive.
struct TaylorData {
    Poly f_taylor;
    Rational f0() const { return f_taylor.part(0).coeff(MultiIndex{}); }
};

struct AnsatzInput {
    int dim = 2;
    int order = 2;                    // k
    AxisDir nu{};                     // p2 = (nu.x)^2 / 2
    std::vector<HomoPoly> p;          // p[i] has degree i, slots 0..order (0..2 unused)
    std::optional<TaylorData> rhs;    // nullopt = unit rhs f == 1

    HomoPoly p2() const;
    // Checks P_k membership: each p_j homogeneous, harmonic, vanishing on
    // {nu.x = 0}. Throws InvalidInput on failure.
    void validate() const;
};

struct AnsatzFamily {
    AnsatzInput input;
    std::vector<HomoPoly> r;   // r[m] degree m, m = 1..k-1 (slot 0 unused)
    Poly a;                    // A_{k,nu}
    Poly half_a2;              // (f(x0)/2) A^2   (f(x0)=1 in the unit case)
    Poly p_ansatz;             // P_k = pi_{<=k+1}(half_a2)

    int order() const { return input.order; }
};

// delta_m(q) = Laplacian((x_axis^2/2) q), a linear automorphism of V_m.
HomoPoly delta_map(int axis, const HomoPoly& q);

// Exact inverse of delta_m via back-substitution in the monomial basis ordered
// by the axis exponent. Total cost O(dim(V_m)^2) rational operations.
HomoPoly delta_inverse(int axis, const HomoPoly& r);

// Runs the recursion of the unique (R_1,...,R_{k-1}) so that
// pi_{<=k-1} Laplacian((f(x0)/2) A^2) equals the rhs Taylor target exactly.
// The degree-m correction is recomputed from the full partial square at every
// step rather than via an incremental formula.
AnsatzFamily build(const AnsatzInput& input);

// Builds with nu and -nu; true when A negates and half_a2 is identical.
bool sign_flip_check(const AnsatzInput& input);

// P_k - P_{k-1} - p_k; asserts pi_{<=k} of it vanishes. Pre: shared prefix.
Poly increment_consistency(const AnsatzFamily& fam_k, const AnsatzFamily& fam_km1);

std::string family_to_json(const AnsatzFamily& fam);
AnsatzFamily family_from_json(const std::string& json_text);

}  // namespace oblab::ansatz
