#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oblab/homopoly.hpp"

namespace oblab::signorini {

using poly::AxisDir;
using poly::HomoPoly;
using poly::Poly;

enum class Parity { Even, Odd, Mixed };

/// A candidate homogeneous solution of the thin obstacle problem with obstacle
/// hyperplane L = {nu.x = 0}.
///
/// Representations:
///  - GlobalPoly:  q(x) = P(x) everywhere (polynomial solutions).
///  - HalfPoly:    q(x) = P(x', |x_n|), the even reflection of a polynomial
///                 defined on the upper half-space (the odd-frequency even
///                 solutions, which carry |x_n| factors).
///  - Analytic2D:  q = amp * r^lambda cos(lambda*theta), theta the angle of
///                 (x_1, |x_2|) in [0, pi]; the non-integer 2-D family.
struct SignoriniCandidate {
    int dim = 2;
    AxisDir normal{};
    Rational lambda;
    enum class Rep { GlobalPoly, HalfPoly, Analytic2D } rep = Rep::GlobalPoly;
    Poly P;
    double amplitude = 1.0;
    Parity parity = Parity::Mixed;

    double lambda_value() const { return to_double(lambda); }
    double eval(const std::vector<double>& x) const;
    // One-sided gradient: for reflected representations the normal component
    // is the limit from {x_n > 0}.
    std::vector<double> grad_upper(const std::vector<double>& x) const;
    // Value q(x',0) on L (exactly the same for both sides).
    double eval_on_L(const std::vector<double>& xprime) const;
    // Normal-derivative jump across L at x' (= 2 d_n q(x',0+) for even reps,
    // 0 for globally smooth polynomials).
    double jump_on_L(const std::vector<double>& xprime) const;
};

std::pair<SignoriniCandidate, SignoriniCandidate> even_odd_split(const SignoriniCandidate& q);

struct VerifyReport {
    bool harmonic_off_L = false;
    bool nonneg_on_L = false;
    bool jump_nonpositive = false;
    double max_harmonic_residual = 0.0;
    double min_on_L = 0.0;
    double max_jump = 0.0;
    bool sampled = false;  // semi-decision: sampling-based, not symbolic
    bool pass() const { return harmonic_off_L && nonneg_on_L && jump_nonpositive; }
};

VerifyReport verify_signorini(const SignoriniCandidate& q, double tolerance);

// Generators of S_lambda^{even/odd} in dimension 2 for admissible lambda;
// empty for inadmissible non-integer lambda.
std::vector<SignoriniCandidate> catalog_2d(const Rational& lambda);

struct GridSpec {
    double extent = 1.0;   // scan [-extent, extent]^{n-1} on L
    double spacing = 1e-2;
};

struct SingularSet {
    bool all_of_L = false;
    std::vector<std::vector<double>> points;  // full n-dim coordinates on L
};

// Sigma(q) = {x in L : q = |grad q| = 0}. Grid scan with resolution-scaled
// thresholds; exact univariate root isolation when dim == 2 and q polynomial.
SingularSet singular_set(const SignoriniCandidate& q, const GridSpec& spec);

struct OddStructure {
    HomoPoly q0;          // in the tangential variables, degree lambda-1
    HomoPoly q1;          // solves the harmonic completion, degree lambda-3
    bool q0_nonneg_sampled = false;
};

// Prop-(iv)-style decomposition check for even candidates of odd integer
// homogeneity: q = -|x_n|(q0(x') + x_n^2 q1) with q0 >= 0 and a harmonic
// completion -x_n q0 + x_n^3 q1. Throws StructureMismatch.
OddStructure odd_structure_check(const SignoriniCandidate& q);

// Basis of lambda-homogeneous harmonic polynomials in dim n (exact).
std::vector<HomoPoly> harmonic_basis(int dim, int degree);
// Harmonic polynomials vanishing on {x_axis = 0} (these are the odd class).
std::vector<HomoPoly> harmonic_vanishing_basis(int dim, int degree, int axis);

struct EnumeratedSpace {
    std::vector<HomoPoly> basis;
    std::vector<bool> sign_ok_sampled;  // per basis element, >= 0 on L sampled
    bool admissibility_known = true;    // false: n >= 3 non-integer lambda
};

// Integer-lambda even/odd spaces in dimension n with sampled sign filtering.
EnumeratedSpace enumerate_nd(int dim, const Rational& lambda, int axis, Parity parity);

}  // namespace oblab::signorini
