#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oblab/errors.hpp"
#include "oblab/multiindex.hpp"
#include "oblab/rational.hpp"

namespace oblab::poly {

// Signed coordinate axis nu = sign * e_axis, the only orientations the exact
// pipeline works in. General directions are rotated to an axis at ingestion.
struct AxisDir {
    int axis = 0;
    int sign = +1;
};

/// Homogeneous polynomial over Q with exact coefficients. Zero coefficients
/// are never stored; equality is coefficient-wise.
class HomoPoly {
  public:
    using TermMap = std::map<MultiIndex, Rational, GradedLex>;

    HomoPoly() = default;
    HomoPoly(int dim, int degree) : dim_(dim), degree_(degree) { check_shape(); }

    static HomoPoly monomial(int dim, const MultiIndex& a, const Rational& c);
    // x_axis as a degree-1 polynomial.
    static HomoPoly axis_linear(int dim, int axis, const Rational& c = 1);

    int dim() const { return dim_; }
    int degree() const { return degree_; }
    bool is_zero() const { return terms_.empty(); }
    const TermMap& terms() const { return terms_; }
    std::size_t term_count() const { return terms_.size(); }

    Rational coeff(const MultiIndex& a) const;
    void add_term(const MultiIndex& a, const Rational& c);

    HomoPoly& operator+=(const HomoPoly& o);
    HomoPoly& operator-=(const HomoPoly& o);
    HomoPoly operator+(const HomoPoly& o) const;
    HomoPoly operator-(const HomoPoly& o) const;
    HomoPoly operator-() const;
    HomoPoly operator*(const Rational& c) const;
    HomoPoly operator*(const HomoPoly& o) const;
    bool operator==(const HomoPoly& o) const;

    HomoPoly partial(int axis) const;       // degree drops by one
    HomoPoly laplacian() const;             // degree drops by two
    HomoPoly mul_axis(int axis) const;      // multiply by x_axis

    // Exact quotient by (nu . x). Pre: vanishes on {nu.x = 0}, i.e. every
    // monomial carries x_axis. Throws NotDivisible otherwise.
    HomoPoly divide_by_linear(const AxisDir& nu) const;
    bool vanishes_on_axis_plane(int axis) const;

    // x -> (x', -x_axis)
    HomoPoly reflect(int axis) const;

    Rational evaluate(const std::vector<Rational>& x) const;
    double evaluate(const std::vector<double>& x) const;
    std::vector<double> gradient(const std::vector<double>& x) const;

    std::string to_text() const;  // one line per term: "num/den : a1 ... an"

  private:
    void check_shape() const;
    int dim_ = 0;
    int degree_ = 0;
    TermMap terms_;
};

/// General polynomial as its graded decomposition: degree -> homogeneous part.
/// No zero parts stored.
class Poly {
  public:
    Poly() = default;
    explicit Poly(int dim) : dim_(dim) {}
    explicit Poly(const HomoPoly& h);
    static Poly constant(int dim, const Rational& c);

    int dim() const { return dim_; }
    bool is_zero() const { return parts_.empty(); }
    const std::map<int, HomoPoly>& parts() const { return parts_; }
    int max_degree() const { return parts_.empty() ? -1 : parts_.rbegin()->first; }

    HomoPoly part(int degree) const;  // zero part if absent
    void set_part(const HomoPoly& h);
    void add_part(const HomoPoly& h);

    Poly& operator+=(const Poly& o);
    Poly& operator-=(const Poly& o);
    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator-() const;
    Poly operator*(const Rational& c) const;
    Poly operator*(const Poly& o) const;
    bool operator==(const Poly& o) const;

    Poly laplacian() const;
    Poly partial(int axis) const;

    // pi_j (exact) and pi_{<=j} (upto).
    Poly project(int degree) const;
    Poly project_upto(int degree) const;

    Rational evaluate(const std::vector<Rational>& x) const;
    double evaluate(const std::vector<double>& x) const;
    std::vector<double> gradient(const std::vector<double>& x) const;

    std::string to_text() const;

  private:
    int dim_ = 0;
    std::map<int, HomoPoly> parts_;
};

Poly operator*(const HomoPoly& a, const Poly& b);

// Canonical text serialization. Degree is implied by |alpha| per line, so one
// format covers both HomoPoly and Poly.
Poly parse_poly_text(const std::string& text, int dim);
HomoPoly parse_homopoly_text(const std::string& text, int dim, int degree);

}  // namespace oblab::poly
