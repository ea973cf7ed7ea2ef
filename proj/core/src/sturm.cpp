#include "oblab/sturm.hpp"

#include <algorithm>

namespace oblab {

int UniPoly::degree() const {
    for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i)
        if (c[static_cast<std::size_t>(i)] != 0) return i;
    return -1;
}

void UniPoly::normalize() {
    while (!c.empty() && c.back() == 0) c.pop_back();
}

Rational UniPoly::eval(const Rational& x) const {
    Rational s = 0;
    for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i)
        s = s * x + c[static_cast<std::size_t>(i)];
    return s;
}

UniPoly UniPoly::derivative() const {
    UniPoly d;
    for (std::size_t i = 1; i < c.size(); ++i) d.c.push_back(c[i] * static_cast<long>(i));
    d.normalize();
    return d;
}

namespace {

UniPoly rem(UniPoly a, const UniPoly& b) {
    int db = b.degree();
    while (a.degree() >= db && db >= 0) {
        int da = a.degree();
        Rational f = a.c[static_cast<std::size_t>(da)] / b.c[static_cast<std::size_t>(db)];
        for (int i = 0; i <= db; ++i)
            a.c[static_cast<std::size_t>(da - db + i)] -= f * b.c[static_cast<std::size_t>(i)];
        a.normalize();
    }
    return a;
}

std::vector<UniPoly> sturm_chain(const UniPoly& p) {
    std::vector<UniPoly> s;
    s.push_back(p);
    s.push_back(p.derivative());
    while (!s.back().is_zero()) {
        UniPoly r = rem(s[s.size() - 2], s.back());
        for (auto& q : r.c) q = -q;
        r.normalize();
        if (r.is_zero()) break;
        s.push_back(r);
    }
    return s;
}

int sign_changes(const std::vector<UniPoly>& chain, const Rational& x) {
    int changes = 0, prev = 0;
    for (const auto& q : chain) {
        Rational v = q.eval(x);
        int s = v > 0 ? 1 : (v < 0 ? -1 : 0);
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++changes;
        prev = s;
    }
    return changes;
}

}  // namespace

UniPoly uni_gcd(UniPoly a, UniPoly b) {
    a.normalize();
    b.normalize();
    while (!b.is_zero()) {
        UniPoly r = rem(a, b);
        a = b;
        b = r;
    }
    // Monic for canonical output.
    int d = a.degree();
    if (d >= 0) {
        Rational lead = a.c[static_cast<std::size_t>(d)];
        for (auto& q : a.c) q /= lead;
    }
    return a;
}

std::vector<double> real_roots(const UniPoly& p_in, double lo, double hi, double width) {
    UniPoly p = p_in;
    p.normalize();
    std::vector<double> roots;
    int deg = p.degree();
    if (deg < 0) return roots;  // identically zero: caller handles
    if (deg == 0) return roots;

    // Square-free part keeps the Sturm counts honest at multiple roots.
    UniPoly g = uni_gcd(p, p.derivative());
    if (g.degree() > 0) {
        // p / g by synthetic division
        UniPoly q;
        UniPoly r = p;
        int dg = g.degree();
        q.c.assign(static_cast<std::size_t>(r.degree() - dg + 1), Rational(0));
        while (r.degree() >= dg) {
            int dr = r.degree();
            Rational f = r.c[static_cast<std::size_t>(dr)] / g.c[static_cast<std::size_t>(dg)];
            q.c[static_cast<std::size_t>(dr - dg)] = f;
            for (int i = 0; i <= dg; ++i)
                r.c[static_cast<std::size_t>(dr - dg + i)] -= f * g.c[static_cast<std::size_t>(i)];
            r.normalize();
        }
        p = q;
        p.normalize();
    }

    auto chain = sturm_chain(p);
    // Nudge endpoints off exact roots.
    Rational a = exact_rational(lo), b = exact_rational(hi);
    if (p.eval(a) == 0) roots.push_back(lo);
    if (p.eval(b) == 0 && hi != lo) roots.push_back(hi);
    Rational eps = exact_rational(width) / 4;
    if (p.eval(a) == 0) a += eps;
    if (p.eval(b) == 0) b -= eps;

    struct Interval {
        Rational a, b;
        int ca, cb;
    };
    std::vector<Interval> stack{{a, b, sign_changes(chain, a), sign_changes(chain, b)}};
    while (!stack.empty()) {
        Interval iv = stack.back();
        stack.pop_back();
        int count = iv.ca - iv.cb;
        if (count <= 0) continue;
        if (count == 1 && to_double(Rational(iv.b - iv.a)) <= width) {
            roots.push_back(to_double(Rational((iv.a + iv.b) / 2)));
            continue;
        }
        Rational mid = (iv.a + iv.b) / 2;
        if (p.eval(mid) == 0) {
            roots.push_back(to_double(mid));
            Rational d = (iv.b - iv.a) / 1024;
            stack.push_back({iv.a, mid - d, iv.ca, sign_changes(chain, Rational(mid - d))});
            stack.push_back({mid + d, iv.b, sign_changes(chain, Rational(mid + d)), iv.cb});
        } else {
            int cm = sign_changes(chain, mid);
            stack.push_back({iv.a, mid, iv.ca, cm});
            stack.push_back({mid, iv.b, cm, iv.cb});
        }
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [width](double x, double y) { return std::abs(x - y) < width * 4; }),
                roots.end());
    return roots;
}

}  // namespace oblab
