#include "oblab/homopoly.hpp"

#include <cmath>
#include <sstream>

namespace oblab {

Rational parse_rational(const std::string& s) {
    Rational q;
    if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational: '" + s + "'");
    q.canonicalize();
    return q;
}

}  // namespace oblab

namespace oblab::poly {

void HomoPoly::check_shape() const {
    if (dim_ < 1 || dim_ > kMaxDim) throw InvalidInput("HomoPoly: dim out of range");
    if (degree_ < 0) throw InvalidInput("HomoPoly: negative degree");
}

HomoPoly HomoPoly::monomial(int dim, const MultiIndex& a, const Rational& c) {
    HomoPoly p(dim, a.degree());
    p.add_term(a, c);
    return p;
}

HomoPoly HomoPoly::axis_linear(int dim, int axis, const Rational& c) {
    MultiIndex a;
    a.set(axis, 1);
    return monomial(dim, a, c);
}

Rational HomoPoly::coeff(const MultiIndex& a) const {
    auto it = terms_.find(a);
    return it == terms_.end() ? Rational(0) : it->second;
}

void HomoPoly::add_term(const MultiIndex& a, const Rational& c) {
    if (c == 0) return;
    if (a.degree() != degree_) throw InvalidInput("HomoPoly: term degree mismatch");
    auto [it, fresh] = terms_.emplace(a, c);
    if (!fresh) {
        it->second += c;
        if (it->second == 0) terms_.erase(it);
    }
}

HomoPoly& HomoPoly::operator+=(const HomoPoly& o) {
    if (o.is_zero()) return *this;
    if (is_zero() && dim_ == 0) *this = HomoPoly(o.dim_, o.degree_);
    if (dim_ != o.dim_) throw DimensionMismatch("HomoPoly +=: dim");
    if (degree_ != o.degree_) throw InvalidInput("HomoPoly +=: degree");
    for (const auto& [a, c] : o.terms_) add_term(a, c);
    return *this;
}

HomoPoly& HomoPoly::operator-=(const HomoPoly& o) { return *this += -o; }

HomoPoly HomoPoly::operator+(const HomoPoly& o) const {
    HomoPoly r = *this;
    r += o;
    return r;
}

HomoPoly HomoPoly::operator-(const HomoPoly& o) const {
    HomoPoly r = *this;
    r -= o;
    return r;
}

HomoPoly HomoPoly::operator-() const {
    HomoPoly r(dim_, degree_);
    for (const auto& [a, c] : terms_) r.terms_.emplace(a, -c);
    return r;
}

HomoPoly HomoPoly::operator*(const Rational& c) const {
    if (c == 0) return HomoPoly(dim_, degree_);
    HomoPoly r(dim_, degree_);
    for (const auto& [a, q] : terms_) r.terms_.emplace(a, q * c);
    return r;
}

HomoPoly HomoPoly::operator*(const HomoPoly& o) const {
    if (dim_ != o.dim_ && !is_zero() && !o.is_zero())
        throw DimensionMismatch("HomoPoly *: dim");
    HomoPoly r(dim_ ? dim_ : o.dim_, degree_ + o.degree_);
    for (const auto& [a, ca] : terms_) {
        for (const auto& [b, cb] : o.terms_) {
            MultiIndex m;
            for (int i = 0; i < dim_; ++i) m.set(i, a[i] + b[i]);
            r.add_term(m, ca * cb);
        }
    }
    return r;
}

bool HomoPoly::operator==(const HomoPoly& o) const {
    if (is_zero() && o.is_zero()) return true;
    return dim_ == o.dim_ && degree_ == o.degree_ && terms_ == o.terms_;
}

HomoPoly HomoPoly::partial(int axis) const {
    HomoPoly r(dim_, degree_ > 0 ? degree_ - 1 : 0);
    for (const auto& [a, c] : terms_) {
        int k = a[axis];
        if (k == 0) continue;
        MultiIndex m = a;
        m.set(axis, k - 1);
        r.add_term(m, c * k);
    }
    return r;
}

HomoPoly HomoPoly::laplacian() const {
    HomoPoly r(dim_, degree_ >= 2 ? degree_ - 2 : 0);
    if (degree_ < 2) return r;
    for (const auto& [a, c] : terms_) {
        for (int i = 0; i < dim_; ++i) {
            int k = a[i];
            if (k < 2) continue;
            MultiIndex m = a;
            m.set(i, k - 2);
            r.add_term(m, c * k * (k - 1));
        }
    }
    return r;
}

HomoPoly HomoPoly::mul_axis(int axis) const {
    HomoPoly r(dim_, degree_ + 1);
    for (const auto& [a, c] : terms_) {
        MultiIndex m = a;
        m.set(axis, a[axis] + 1);
        r.terms_.emplace(m, c);
    }
    return r;
}

bool HomoPoly::vanishes_on_axis_plane(int axis) const {
    for (const auto& [a, c] : terms_)
        if (a[axis] == 0) return false;
    return true;
}

HomoPoly HomoPoly::divide_by_linear(const AxisDir& nu) const {
    HomoPoly r(dim_, degree_ > 0 ? degree_ - 1 : 0);
    for (const auto& [a, c] : terms_) {
        if (a[nu.axis] == 0)
            throw NotDivisible("divide_by_linear: polynomial does not vanish on {nu.x=0}");
        MultiIndex m = a;
        m.set(nu.axis, a[nu.axis] - 1);
        r.terms_.emplace(m, nu.sign > 0 ? c : -c);
    }
    return r;
}

HomoPoly HomoPoly::reflect(int axis) const {
    HomoPoly r(dim_, degree_);
    for (const auto& [a, c] : terms_) r.terms_.emplace(a, (a[axis] % 2 == 0) ? c : -c);
    return r;
}

Rational HomoPoly::evaluate(const std::vector<Rational>& x) const {
    Rational s = 0;
    for (const auto& [a, c] : terms_) {
        Rational t = c;
        for (int i = 0; i < dim_; ++i)
            for (int k = 0; k < a[i]; ++k) t *= x[static_cast<std::size_t>(i)];
        s += t;
    }
    return s;
}

double HomoPoly::evaluate(const std::vector<double>& x) const {
    double s = 0;
    for (const auto& [a, c] : terms_) {
        double t = to_double(c);
        for (int i = 0; i < dim_; ++i) t *= std::pow(x[static_cast<std::size_t>(i)], a[i]);
        s += t;
    }
    return s;
}

std::vector<double> HomoPoly::gradient(const std::vector<double>& x) const {
    std::vector<double> g(static_cast<std::size_t>(dim_), 0.0);
    for (int i = 0; i < dim_; ++i) g[static_cast<std::size_t>(i)] = partial(i).evaluate(x);
    return g;
}

std::string HomoPoly::to_text() const {
    std::ostringstream os;
    for (const auto& [a, c] : terms_) {
        os << c.get_num().get_str() << "/" << c.get_den().get_str() << " :";
        for (int i = 0; i < dim_; ++i) os << " " << a[i];
        os << "\n";
    }
    return os.str();
}

Poly::Poly(const HomoPoly& h) : dim_(h.dim()) {
    if (!h.is_zero()) parts_.emplace(h.degree(), h);
}

Poly Poly::constant(int dim, const Rational& c) {
    Poly p(dim);
    p.add_part(HomoPoly::monomial(dim, MultiIndex{}, c));
    return p;
}

HomoPoly Poly::part(int degree) const {
    auto it = parts_.find(degree);
    return it == parts_.end() ? HomoPoly(dim_, degree) : it->second;
}

void Poly::set_part(const HomoPoly& h) {
    parts_.erase(h.degree());
    if (!h.is_zero()) parts_.emplace(h.degree(), h);
}

void Poly::add_part(const HomoPoly& h) {
    if (h.is_zero()) return;
    if (dim_ == 0) dim_ = h.dim();
    if (h.dim() != dim_) throw DimensionMismatch("Poly::add_part: dim");
    auto it = parts_.find(h.degree());
    if (it == parts_.end()) {
        parts_.emplace(h.degree(), h);
    } else {
        it->second += h;
        if (it->second.is_zero()) parts_.erase(it);
    }
}

Poly& Poly::operator+=(const Poly& o) {
    for (const auto& [d, h] : o.parts_) add_part(h);
    return *this;
}

Poly& Poly::operator-=(const Poly& o) { return *this += -o; }

Poly Poly::operator+(const Poly& o) const {
    Poly r = *this;
    r += o;
    return r;
}

Poly Poly::operator-(const Poly& o) const {
    Poly r = *this;
    r -= o;
    return r;
}

Poly Poly::operator-() const {
    Poly r(dim_);
    for (const auto& [d, h] : parts_) r.parts_.emplace(d, -h);
    return r;
}

Poly Poly::operator*(const Rational& c) const {
    Poly r(dim_);
    if (c == 0) return r;
    for (const auto& [d, h] : parts_) r.parts_.emplace(d, h * c);
    return r;
}

Poly Poly::operator*(const Poly& o) const {
    Poly r(dim_ ? dim_ : o.dim_);
    for (const auto& [da, ha] : parts_)
        for (const auto& [db, hb] : o.parts_) r.add_part(ha * hb);
    return r;
}

bool Poly::operator==(const Poly& o) const {
    if (parts_.empty() && o.parts_.empty()) return true;
    return dim_ == o.dim_ && parts_ == o.parts_;
}

Poly Poly::laplacian() const {
    Poly r(dim_);
    for (const auto& [d, h] : parts_) r.add_part(h.laplacian());
    return r;
}

Poly Poly::partial(int axis) const {
    Poly r(dim_);
    for (const auto& [d, h] : parts_) r.add_part(h.partial(axis));
    return r;
}

Poly Poly::project(int degree) const {
    Poly r(dim_);
    auto it = parts_.find(degree);
    if (it != parts_.end()) r.parts_.emplace(degree, it->second);
    return r;
}

Poly Poly::project_upto(int degree) const {
    Poly r(dim_);
    for (const auto& [d, h] : parts_) {
        if (d > degree) break;
        r.parts_.emplace(d, h);
    }
    return r;
}

Rational Poly::evaluate(const std::vector<Rational>& x) const {
    Rational s = 0;
    for (const auto& [d, h] : parts_) s += h.evaluate(x);
    return s;
}

double Poly::evaluate(const std::vector<double>& x) const {
    double s = 0;
    for (const auto& [d, h] : parts_) s += h.evaluate(x);
    return s;
}

std::vector<double> Poly::gradient(const std::vector<double>& x) const {
    std::vector<double> g(static_cast<std::size_t>(dim_), 0.0);
    for (const auto& [d, h] : parts_) {
        auto gh = h.gradient(x);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += gh[i];
    }
    return g;
}

std::string Poly::to_text() const {
    std::string s;
    for (const auto& [d, h] : parts_) s += h.to_text();
    return s;
}

Poly operator*(const HomoPoly& a, const Poly& b) { return Poly(a) * b; }

Poly parse_poly_text(const std::string& text, int dim) {
    Poly p(dim);
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto colon = line.find(':');
        if (colon == std::string::npos) throw InvalidInput("poly text: missing ':' in '" + line + "'");
        Rational c = parse_rational([&] {
            std::string s = line.substr(0, colon);
            std::string out;
            for (char ch : s)
                if (!std::isspace(static_cast<unsigned char>(ch))) out += ch;
            return out;
        }());
        std::istringstream es(line.substr(colon + 1));
        MultiIndex a;
        int v, i = 0;
        while (es >> v) {
            if (i >= dim) throw InvalidInput("poly text: too many exponents");
            if (v < 0) throw InvalidInput("poly text: negative exponent");
            a.set(i++, v);
        }
        if (i != dim) throw InvalidInput("poly text: expected " + std::to_string(dim) + " exponents");
        p.add_part(HomoPoly::monomial(dim, a, c));
    }
    return p;
}

HomoPoly parse_homopoly_text(const std::string& text, int dim, int degree) {
    Poly p = parse_poly_text(text, dim);
    for (const auto& [d, h] : p.parts())
        if (d != degree) throw InvalidInput("expected homogeneous of degree " + std::to_string(degree));
    return p.part(degree);
}

}  // namespace oblab::poly
