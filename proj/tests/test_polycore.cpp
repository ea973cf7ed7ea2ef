#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oblab/homopoly.hpp"
#include "oblab/sphere.hpp"

using namespace oblab;
using namespace oblab::poly;

namespace {

Poly parse(const std::string& text, int dim = 2) { return parse_poly_text(text, dim); }

// Small-rational random polynomial, numerators/denominators bounded by 10.
HomoPoly random_homo(std::mt19937_64& rng, int dim, int deg) {
    std::uniform_int_distribution<int> num(-10, 10), den(1, 10);
    HomoPoly h(dim, deg);
    std::function<void(int, int, MultiIndex&)> rec = [&](int d, int left, MultiIndex& a) {
        if (d == dim - 1) {
            a.set(d, left);
            int n = num(rng);
            if (n != 0) h.add_term(a, make_rational(n, den(rng)));
            return;
        }
        for (int e = 0; e <= left; ++e) {
            a.set(d, e);
            rec(d + 1, left - e, a);
        }
    };
    MultiIndex a;
    rec(0, deg, a);
    return h;
}

// Quadrature oracle for 2-D sphere integrals: trapezoid over the circle is
// spectrally accurate for trigonometric polynomials.
double circle_quadrature(const Poly& p, const Poly& q) {
    const int N = 4096;
    double acc = 0;
    for (int s = 0; s < N; ++s) {
        double th = 2.0 * M_PI * s / N;
        std::vector<double> x{std::cos(th), std::sin(th)};
        acc += p.evaluate(x) * q.evaluate(x);
    }
    return acc * 2.0 * M_PI / N;
}

}  // namespace

TEST_CASE("laplacian worked values") {
    CHECK(parse("1/2 : 0 2").laplacian() == Poly::constant(2, 1));
    CHECK(parse("1 : 0 3\n-3 : 2 1").laplacian().is_zero());
    // quartic harmonic vs non-harmonic contrast
    CHECK(parse("1 : 4 0\n-6 : 2 2\n1 : 0 4").laplacian().is_zero());
    CHECK(parse("1 : 2 2").laplacian() == parse("2 : 0 2\n2 : 2 0"));
}

TEST_CASE("projection modes") {
    Poly p = parse("1 : 0 0\n1 : 0 2\n1 : 3 0");
    CHECK(p.project(2) == parse("1 : 0 2"));
    CHECK(p.project_upto(2) == parse("1 : 0 0\n1 : 0 2"));
    CHECK(p.project(5).is_zero());
}

TEST_CASE("divide_by_linear") {
    AxisDir e2{1, +1};
    HomoPoly p3 = parse("1 : 0 3\n-3 : 2 1").part(3);
    CHECK(p3.divide_by_linear(e2) == parse("1 : 0 2\n-3 : 2 0").part(2));
    CHECK(parse("1 : 0 2").part(2).divide_by_linear(e2) == parse("1 : 0 1").part(1));
    CHECK_THROWS_AS(parse("1 : 2 0").part(2).divide_by_linear(e2), NotDivisible);
    // multiply back reproduces the input
    std::mt19937_64 rng(7);
    for (int it = 0; it < 20; ++it) {
        HomoPoly q = random_homo(rng, 3, 3);
        HomoPoly p = q.mul_axis(2);
        CHECK(p.divide_by_linear(AxisDir{2, +1}) == q);
        HomoPoly back = p.divide_by_linear(AxisDir{2, -1});
        CHECK(p == back.mul_axis(2) * Rational(-1));
    }
}

TEST_CASE("sphere inner worked values") {
    auto x1 = parse("1 : 1 0"), x2 = parse("1 : 0 1");
    CHECK(sphere_inner(x1, x2).per_area == 0);
    auto v = sphere_inner(x2, x2);
    CHECK(v.per_area == make_rational(1, 2));
    CHECK(v.value == doctest::Approx(M_PI).epsilon(1e-12));
    auto half = parse("1/2 : 0 2");
    auto w = sphere_inner(half, half);
    CHECK(w.per_area == make_rational(3, 32));
    CHECK(w.value == doctest::Approx(3.0 * M_PI / 16.0).epsilon(1e-12));
}

TEST_CASE("sphere inner vs quadrature oracle") {
    std::mt19937_64 rng(11);
    for (int it = 0; it < 10; ++it) {
        Poly p(random_homo(rng, 2, it % 5));
        Poly q(random_homo(rng, 2, (it + 2) % 5));
        double exact = sphere_inner(p, q).value;
        double quad = circle_quadrature(p, q);
        CHECK(std::abs(exact - quad) < 1e-10 * (1.0 + std::abs(quad)));
    }
}

TEST_CASE("evaluate and gradient") {
    Poly p = parse("1/2 : 0 2");
    CHECK(p.evaluate(std::vector<Rational>{Rational(0), Rational(2)}) == 2);
    auto g = p.gradient({1.0, 3.0});
    CHECK(g[0] == 0.0);
    CHECK(g[1] == 3.0);
    Poly cubic = parse("1 : 0 3\n-3 : 2 1");
    CHECK(cubic.evaluate(std::vector<Rational>{Rational(1), Rational(1)}) == -2);
}

TEST_CASE("Leibniz identity for the laplacian") {
    std::mt19937_64 rng(23);
    for (int it = 0; it < 30; ++it) {
        int dim = 2 + static_cast<int>(rng() % 3);  // up to 4
        int dp = 1 + static_cast<int>(rng() % 4);
        int dq = 1 + static_cast<int>(rng() % (7 - dp));
        Poly p(random_homo(rng, dim, dp)), q(random_homo(rng, dim, dq));
        Poly lhs = (p * q).laplacian();
        Poly rhs = p * q.laplacian() + q * p.laplacian();
        for (int a = 0; a < dim; ++a) rhs += p.partial(a) * q.partial(a) * Rational(2);
        CHECK(lhs == rhs);
    }
}

TEST_CASE("sphere inner: symmetry, bilinearity, positivity, parity orthogonality") {
    std::mt19937_64 rng(37);
    for (int it = 0; it < 15; ++it) {
        int dim = 2 + static_cast<int>(rng() % 2);
        Poly p(random_homo(rng, dim, 2 + static_cast<int>(rng() % 3)));
        Poly q(random_homo(rng, dim, 2 + static_cast<int>(rng() % 3)));
        Poly r(random_homo(rng, dim, 2));
        CHECK(sphere_inner(p, q).per_area == sphere_inner(q, p).per_area);
        Rational lin = sphere_inner(p + q * Rational(3), r).per_area;
        CHECK(lin == sphere_inner(p, r).per_area + sphere_inner(q, r).per_area * 3);
        if (!p.is_zero()) CHECK(sphere_inner(p, p).per_area > 0);
        // odd vs even total degree: orthogonal under the antipodal map
        Poly odd(random_homo(rng, dim, 3)), even(random_homo(rng, dim, 4));
        CHECK(sphere_inner(odd, even).per_area == 0);
    }
}

TEST_CASE("text serialization round trip") {
    std::mt19937_64 rng(41);
    for (int it = 0; it < 10; ++it) {
        int dim = 2 + static_cast<int>(rng() % 3);
        Poly p(random_homo(rng, dim, 1 + static_cast<int>(rng() % 5)));
        p += Poly(random_homo(rng, dim, 2));
        CHECK(parse_poly_text(p.to_text(), dim) == p);
    }
}
