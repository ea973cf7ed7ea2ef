#include "oblab/sphere.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace oblab::poly {

namespace {
std::map<std::pair<int, MultiIndex>, Rational, bool (*)(const std::pair<int, MultiIndex>&,
                                                        const std::pair<int, MultiIndex>&)>
    g_cache([](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        return GradedLex{}(a.second, b.second);
    });
std::mutex g_cache_mu;
}  // namespace

Rational sphere_moment_per_area(int dim, const MultiIndex& alpha) {
    for (int i = 0; i < dim; ++i)
        if (alpha[i] % 2 != 0) return 0;
    {
        std::lock_guard<std::mutex> lk(g_cache_mu);
        auto it = g_cache.find({dim, alpha});
        if (it != g_cache.end()) return it->second;
    }
    // With beta_i = alpha_i/2 and B = sum beta_i:
    //   moment/|S^{n-1}| = prod_i (2 beta_i - 1)!! / prod_{j=0}^{B-1} (n + 2j)
    Rational num = 1;
    long bsum = 0;
    for (int i = 0; i < dim; ++i) {
        long b = alpha[i] / 2;
        bsum += b;
        for (long k = 1; k <= b; ++k) num *= (2 * k - 1);
    }
    Rational den = 1;
    for (long j = 0; j < bsum; ++j) den *= (dim + 2 * j);
    Rational m = num / den;
    std::lock_guard<std::mutex> lk(g_cache_mu);
    g_cache.emplace(std::make_pair(dim, alpha), m);
    return m;
}

double sphere_area(int dim) {
    // 2 pi^{n/2} / Gamma(n/2)
    return 2.0 * std::pow(M_PI, dim / 2.0) / std::tgamma(dim / 2.0);
}

SphereInner sphere_inner(const Poly& p, const Poly& q) {
    if (!p.is_zero() && !q.is_zero() && p.dim() != q.dim())
        throw DimensionMismatch("sphere_inner: dim");
    int dim = p.is_zero() ? q.dim() : p.dim();
    Rational acc = 0;
    for (const auto& [dp, hp] : p.parts()) {
        for (const auto& [dq, hq] : q.parts()) {
            for (const auto& [a, ca] : hp.terms()) {
                for (const auto& [b, cb] : hq.terms()) {
                    MultiIndex m;
                    for (int i = 0; i < dim; ++i) m.set(i, a[i] + b[i]);
                    Rational mom = sphere_moment_per_area(dim, m);
                    if (mom != 0) acc += ca * cb * mom;
                }
            }
        }
    }
    SphereInner r;
    r.per_area = acc;
    r.value = dim > 0 ? to_double(acc) * sphere_area(dim) : 0.0;
    return r;
}

SphereInner sphere_inner(const HomoPoly& p, const HomoPoly& q) {
    return sphere_inner(Poly(p), Poly(q));
}

}  // namespace oblab::poly
