#include "oblab/realpoly.hpp"

#include <cmath>
#include <sstream>

namespace oblab::poly {

RealPoly::RealPoly(const Poly& p) : dim_(p.dim()) {
    for (const auto& [d, h] : p.parts())
        for (const auto& [a, c] : h.terms()) add_term(a, to_double(c));
}

RealPoly RealPoly::constant(int dim, double c) {
    RealPoly p(dim);
    p.add_term(MultiIndex{}, c);
    return p;
}

RealPoly RealPoly::monomial(int dim, const MultiIndex& a, double c) {
    RealPoly p(dim);
    p.add_term(a, c);
    return p;
}

void RealPoly::add_term(const MultiIndex& a, double c) {
    if (c == 0.0) return;
    auto [it, fresh] = terms_.emplace(a, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0.0) terms_.erase(it);
    }
}

RealPoly RealPoly::operator+(const RealPoly& o) const {
    RealPoly r = *this;
    if (r.dim_ == 0) r.dim_ = o.dim_;
    for (const auto& [a, c] : o.terms_) r.add_term(a, c);
    return r;
}

RealPoly RealPoly::operator-(const RealPoly& o) const { return *this + o * -1.0; }

RealPoly RealPoly::operator*(double c) const {
    RealPoly r(dim_);
    if (c == 0.0) return r;
    for (const auto& [a, q] : terms_) r.terms_.emplace(a, q * c);
    return r;
}

RealPoly RealPoly::operator*(const RealPoly& o) const {
    RealPoly r(dim_ ? dim_ : o.dim_);
    for (const auto& [a, ca] : terms_) {
        for (const auto& [b, cb] : o.terms_) {
            MultiIndex m;
            for (int i = 0; i < r.dim_; ++i) m.set(i, a[i] + b[i]);
            r.add_term(m, ca * cb);
        }
    }
    return r;
}

RealPoly RealPoly::partial(int axis) const {
    RealPoly r(dim_);
    for (const auto& [a, c] : terms_) {
        int k = a[axis];
        if (k == 0) continue;
        MultiIndex m = a;
        m.set(axis, k - 1);
        r.add_term(m, c * k);
    }
    return r;
}

RealPoly RealPoly::derivative(const MultiIndex& alpha) const {
    RealPoly r = *this;
    for (int i = 0; i < dim_; ++i)
        for (int k = 0; k < alpha[i]; ++k) r = r.partial(i);
    return r;
}

RealPoly RealPoly::homogeneous_part(int degree) const {
    RealPoly r(dim_);
    for (const auto& [a, c] : terms_)
        if (a.degree() == degree) r.terms_.emplace(a, c);
    return r;
}

RealPoly RealPoly::truncate(int degree) const {
    RealPoly r(dim_);
    for (const auto& [a, c] : terms_)
        if (a.degree() <= degree) r.terms_.emplace(a, c);
    return r;
}

double RealPoly::evaluate(const std::vector<double>& x) const {
    double s = 0;
    for (const auto& [a, c] : terms_) {
        double t = c;
        for (int i = 0; i < dim_; ++i) {
            for (int k = 0; k < a[i]; ++k) t *= x[static_cast<std::size_t>(i)];
        }
        s += t;
    }
    return s;
}

std::vector<double> RealPoly::gradient(const std::vector<double>& x) const {
    std::vector<double> g(static_cast<std::size_t>(dim_), 0.0);
    for (int i = 0; i < dim_; ++i) g[static_cast<std::size_t>(i)] = partial(i).evaluate(x);
    return g;
}

RealPoly RealPoly::compose_linear(const std::vector<std::vector<double>>& M) const {
    // Row i of M holds the coefficients of old variable x_i in the new ones.
    RealPoly r(dim_);
    std::vector<RealPoly> lin(static_cast<std::size_t>(dim_));
    for (int i = 0; i < dim_; ++i) {
        RealPoly li(dim_);
        for (int j = 0; j < dim_; ++j) {
            MultiIndex a;
            a.set(j, 1);
            li.add_term(a, M[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        }
        lin[static_cast<std::size_t>(i)] = li;
    }
    for (const auto& [a, c] : terms_) {
        RealPoly t = RealPoly::constant(dim_, c);
        for (int i = 0; i < dim_; ++i)
            for (int k = 0; k < a[i]; ++k) t = t * lin[static_cast<std::size_t>(i)];
        r = r + t;
    }
    return r;
}

RealPoly RealPoly::shift(const std::vector<double>& s) const {
    RealPoly r(dim_);
    std::vector<RealPoly> lin(static_cast<std::size_t>(dim_));
    for (int i = 0; i < dim_; ++i) {
        RealPoly li = RealPoly::constant(dim_, s[static_cast<std::size_t>(i)]);
        MultiIndex a;
        a.set(i, 1);
        li.add_term(a, 1.0);
        lin[static_cast<std::size_t>(i)] = li;
    }
    for (const auto& [a, c] : terms_) {
        RealPoly t = RealPoly::constant(dim_, c);
        for (int i = 0; i < dim_; ++i)
            for (int k = 0; k < a[i]; ++k) t = t * lin[static_cast<std::size_t>(i)];
        r = r + t;
    }
    return r;
}

RealPoly RealPoly::pruned(double tol) const {
    RealPoly r(dim_);
    for (const auto& [a, c] : terms_)
        if (std::abs(c) > tol) r.terms_.emplace(a, c);
    return r;
}

double RealPoly::coeff_norm() const {
    double s = 0;
    for (const auto& [a, c] : terms_) s += c * c;
    return std::sqrt(s);
}

std::string RealPoly::to_text() const {
    std::ostringstream os;
    os.precision(17);
    for (const auto& [a, c] : terms_) {
        os << c << " :";
        for (int i = 0; i < dim_; ++i) os << " " << a[i];
        os << "\n";
    }
    return os.str();
}

}  // namespace oblab::poly
