#include "oblab/signorini.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "oblab/errors.hpp"
#include "oblab/linsolve.hpp"
#include "oblab/sturm.hpp"

namespace oblab::signorini {

namespace {

double halton(std::size_t i, int base) {
    double f = 1.0, r = 0.0;
    for (std::size_t n = i + 1; n > 0; n /= static_cast<std::size_t>(base)) {
        f /= base;
        r += f * static_cast<double>(n % static_cast<std::size_t>(base));
    }
    return r;
}

// Quasi-random points on the obstacle hyperplane, unit box.
std::vector<std::vector<double>> l_samples(int dim, int axis, std::size_t count) {
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17};
    std::vector<std::vector<double>> pts;
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> x(static_cast<std::size_t>(dim), 0.0);
        int pb = 0;
        for (int d = 0; d < dim; ++d) {
            if (d == axis) continue;
            x[static_cast<std::size_t>(d)] = 2.0 * halton(i, primes[pb++]) - 1.0;
        }
        pts.push_back(std::move(x));
    }
    return pts;
}

double radius_prime(const std::vector<double>& x, int axis) {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (static_cast<int>(i) != axis) s += x[i] * x[i];
    return std::sqrt(s);
}

}  // namespace

double SignoriniCandidate::eval(const std::vector<double>& x) const {
    switch (rep) {
        case Rep::GlobalPoly:
            return P.evaluate(x);
        case Rep::HalfPoly: {
            std::vector<double> y = x;
            auto& xn = y[static_cast<std::size_t>(normal.axis)];
            xn = std::abs(xn);
            return P.evaluate(y);
        }
        case Rep::Analytic2D: {
            double r = std::hypot(x[0], x[1]);
            if (r == 0.0) return 0.0;
            double th = std::atan2(std::abs(x[1]), x[0]);
            double l = lambda_value();
            return amplitude * std::pow(r, l) * std::cos(l * th);
        }
    }
    return 0.0;
}

std::vector<double> SignoriniCandidate::grad_upper(const std::vector<double>& x) const {
    switch (rep) {
        case Rep::GlobalPoly:
            return P.gradient(x);
        case Rep::HalfPoly: {
            std::vector<double> y = x;
            auto& xn = y[static_cast<std::size_t>(normal.axis)];
            xn = std::abs(xn);
            return P.gradient(y);
        }
        case Rep::Analytic2D: {
            double r = std::hypot(x[0], x[1]);
            double l = lambda_value();
            if (r == 0.0) return {0.0, 0.0};
            double th = std::atan2(std::abs(x[1]), x[0]);
            double dr = amplitude * l * std::pow(r, l - 1) * std::cos(l * th);
            double dth = -amplitude * l * std::pow(r, l - 1) * std::sin(l * th);
            double c = std::cos(th), s = std::sin(th);
            return {dr * c - dth * s, dr * s + dth * c};
        }
    }
    return {};
}

double SignoriniCandidate::eval_on_L(const std::vector<double>& xprime) const {
    std::vector<double> x = xprime;
    x[static_cast<std::size_t>(normal.axis)] = 0.0;
    return eval(x);
}

double SignoriniCandidate::jump_on_L(const std::vector<double>& xprime) const {
    if (rep == Rep::GlobalPoly) return 0.0;
    std::vector<double> x = xprime;
    x[static_cast<std::size_t>(normal.axis)] = 0.0;
    auto g = grad_upper(x);
    return 2.0 * g[static_cast<std::size_t>(normal.axis)];
}

std::pair<SignoriniCandidate, SignoriniCandidate> even_odd_split(const SignoriniCandidate& q) {
    SignoriniCandidate ev = q, od = q;
    ev.parity = Parity::Even;
    od.parity = Parity::Odd;
    if (q.rep == SignoriniCandidate::Rep::GlobalPoly) {
        Poly pe(q.P.dim()), po(q.P.dim());
        for (const auto& [d, h] : q.P.parts()) {
            for (const auto& [a, c] : h.terms()) {
                auto& dst = (a[q.normal.axis] % 2 == 0) ? pe : po;
                dst.add_part(HomoPoly::monomial(q.P.dim(), a, c));
            }
        }
        ev.P = pe;
        od.P = po;
    } else {
        // Reflected representations are even by construction.
        od.rep = SignoriniCandidate::Rep::GlobalPoly;
        od.P = Poly(q.dim);
        od.amplitude = 0.0;
    }
    return {ev, od};
}

VerifyReport verify_signorini(const SignoriniCandidate& q, double tolerance) {
    VerifyReport rep;
    const int axis = q.normal.axis;

    // (a) harmonic off L
    if (q.rep == SignoriniCandidate::Rep::Analytic2D) {
        rep.sampled = true;
        double worst = 0.0;
        const double h1 = 1e-3, h2 = 2e-3;
        auto fd_lap = [&](const std::vector<double>& x, double h) {
            double s = -2.0 * static_cast<double>(q.dim) * q.eval(x);
            for (int d = 0; d < q.dim; ++d) {
                auto xp = x, xm = x;
                xp[static_cast<std::size_t>(d)] += h;
                xm[static_cast<std::size_t>(d)] -= h;
                s += q.eval(xp) + q.eval(xm);
            }
            return s / (h * h);
        };
        for (double r : {0.4, 0.7, 1.0}) {
            for (int i = 1; i < 16; ++i) {
                double th = M_PI * i / 16.0;
                if (std::abs(std::sin(th)) < 0.2) continue;
                for (double sgn : {1.0, -1.0}) {
                    std::vector<double> x{r * std::cos(th), sgn * r * std::sin(th)};
                    double d1 = fd_lap(x, h1), d2 = fd_lap(x, h2);
                    worst = std::max(worst, std::abs((4.0 * d1 - d2) / 3.0));
                }
            }
        }
        rep.max_harmonic_residual = worst;
        rep.harmonic_off_L = worst <= tolerance;
    } else {
        rep.max_harmonic_residual = 0.0;
        rep.harmonic_off_L = q.P.laplacian().is_zero();
    }

    // (b) q >= 0 on a sample of L, (c) normal-derivative jump <= 0 on L
    double minv = 0.0, maxj = 0.0;
    if (q.dim == 2) {
        for (double t = -1.0; t <= 1.0 + 1e-12; t += 1e-3) {
            std::vector<double> xp(2, 0.0);
            xp[axis == 0 ? 1 : 0] = t;
            minv = std::min(minv, q.eval_on_L(xp));
            maxj = std::max(maxj, q.jump_on_L(xp));
        }
        rep.sampled = rep.sampled || !(q.rep == SignoriniCandidate::Rep::GlobalPoly && q.P.is_zero());
    } else {
        rep.sampled = true;
        for (const auto& xp : l_samples(q.dim, axis, 1000)) {
            minv = std::min(minv, q.eval_on_L(xp));
            maxj = std::max(maxj, q.jump_on_L(xp));
        }
    }
    rep.min_on_L = minv;
    rep.max_jump = maxj;
    rep.nonneg_on_L = minv >= -tolerance;
    rep.jump_nonpositive = maxj <= tolerance;
    return rep;
}

namespace {

// Re(z^m) (kind 0) and Im(z^m) (kind 1) as exact 2-D harmonic polynomials.
HomoPoly harmonic_2d(int m, int kind) {
    HomoPoly h(2, m);
    Rational binom = 1;
    for (int j = 0; j <= m; ++j) {
        if (j > 0) binom = binom * (m - j + 1) / j;
        if (j % 2 == kind % 2) {
            int q = (kind == 0) ? j / 2 : (j - 1) / 2;
            Rational c = (q % 2 == 0) ? binom : -binom;
            MultiIndex a;
            a.set(0, m - j);
            a.set(1, j);
            h.add_term(a, c);
        }
    }
    return h;
}

SignoriniCandidate make_candidate(int dim, const Rational& lambda, AxisDir normal,
                                  SignoriniCandidate::Rep rep, Poly P, Parity par) {
    SignoriniCandidate c;
    c.dim = dim;
    c.normal = normal;
    c.lambda = lambda;
    c.rep = rep;
    c.P = std::move(P);
    c.parity = par;
    return c;
}

}  // namespace

std::vector<SignoriniCandidate> catalog_2d(const Rational& lambda) {
    std::vector<SignoriniCandidate> out;
    AxisDir nrm{1, +1};  // L = {x_2 = 0}
    if (lambda < 0) return out;
    if (lambda.get_den() == 1) {
        long m = lambda.get_num().get_si();
        if (m == 0) {
            out.push_back(make_candidate(2, lambda, nrm, SignoriniCandidate::Rep::GlobalPoly,
                                         Poly::constant(2, 1), Parity::Even));
            return out;
        }
        if (m % 2 == 0) {
            out.push_back(make_candidate(2, lambda, nrm, SignoriniCandidate::Rep::GlobalPoly,
                                         Poly(harmonic_2d(static_cast<int>(m), 0)), Parity::Even));
        } else {
            // Even solutions of odd integer homogeneity carry |x_2|: store the
            // upper-half polynomial -Im(z^m), whose normal jump is <= 0.
            out.push_back(make_candidate(2, lambda, nrm, SignoriniCandidate::Rep::HalfPoly,
                                         Poly(-harmonic_2d(static_cast<int>(m), 1)), Parity::Even));
        }
        out.push_back(make_candidate(2, lambda, nrm, SignoriniCandidate::Rep::GlobalPoly,
                                     Poly(harmonic_2d(static_cast<int>(m), 1)), Parity::Odd));
        return out;
    }
    // Non-integer: admissible exactly at lambda = 2m + 3/2.
    Rational shifted = (lambda - make_rational(3, 2)) / 2;
    if (shifted.get_den() == 1 && shifted >= 0) {
        SignoriniCandidate c;
        c.dim = 2;
        c.normal = nrm;
        c.lambda = lambda;
        c.rep = SignoriniCandidate::Rep::Analytic2D;
        c.amplitude = 1.0;
        c.parity = Parity::Even;
        out.push_back(c);
    }
    return out;
}

SingularSet singular_set(const SignoriniCandidate& q, const GridSpec& spec) {
    SingularSet out;
    const int axis = q.normal.axis;
    const bool poly_rep = q.rep != SignoriniCandidate::Rep::Analytic2D;
    if (poly_rep && q.P.is_zero()) {
        out.all_of_L = true;
        for (double t = -spec.extent; t <= spec.extent + 1e-12; t += spec.spacing) {
            std::vector<double> x(static_cast<std::size_t>(q.dim), 0.0);
            x[axis == 0 ? 1 : 0] = t;
            out.points.push_back(x);
        }
        return out;
    }

    if (q.dim == 2 && poly_rep) {
        // Exact route: restrict to L and isolate common real roots.
        int tang = axis == 0 ? 1 : 0;
        auto restrict_L = [&](const Poly& p) {
            UniPoly u;
            for (const auto& [d, h] : p.parts()) {
                for (const auto& [a, c] : h.terms()) {
                    if (a[axis] != 0) continue;
                    std::size_t e = static_cast<std::size_t>(a[tang]);
                    if (u.c.size() <= e) u.c.resize(e + 1, Rational(0));
                    u.c[e] += c;
                }
            }
            u.normalize();
            return u;
        };
        std::vector<UniPoly> sys;
        sys.push_back(restrict_L(q.P));
        sys.push_back(restrict_L(q.P.partial(tang)));
        sys.push_back(restrict_L(q.P.partial(axis)));
        UniPoly g;
        bool any = false;
        for (auto& u : sys) {
            if (u.is_zero()) continue;
            g = any ? uni_gcd(g, u) : u;
            any = true;
        }
        if (!any) {
            out.all_of_L = true;
            return out;
        }
        if (g.degree() == 0) return out;  // no common zero
        for (double r : real_roots(g, -spec.extent, spec.extent)) {
            std::vector<double> x(2, 0.0);
            x[static_cast<std::size_t>(tang)] = r;
            out.points.push_back(x);
        }
        return out;
    }

    // Grid scan with resolution-scaled thresholds.
    const double tol_q = spec.spacing * spec.spacing;
    const double tol_g = spec.spacing;
    std::vector<int> tang_axes;
    for (int d = 0; d < q.dim; ++d)
        if (d != axis) tang_axes.push_back(d);
    long per_axis = static_cast<long>(std::floor(2 * spec.extent / spec.spacing)) + 1;
    std::vector<long> idx(tang_axes.size(), 0);
    while (true) {
        std::vector<double> x(static_cast<std::size_t>(q.dim), 0.0);
        for (std::size_t i = 0; i < tang_axes.size(); ++i)
            x[static_cast<std::size_t>(tang_axes[i])] =
                -spec.extent + spec.spacing * static_cast<double>(idx[i]);
        auto g = q.grad_upper(x);
        double gn = 0;
        for (double v : g) gn += v * v;
        if (std::abs(q.eval(x)) < tol_q && std::sqrt(gn) < tol_g) out.points.push_back(x);
        std::size_t d = 0;
        while (d < idx.size() && ++idx[d] >= per_axis) idx[d++] = 0;
        if (d == idx.size()) break;
    }
    return out;
}

OddStructure odd_structure_check(const SignoriniCandidate& q) {
    if (q.rep != SignoriniCandidate::Rep::HalfPoly)
        throw StructureMismatch("odd_structure_check: expects an even |x_n|-type candidate");
    if (q.lambda.get_den() != 1 || q.lambda.get_num().get_si() % 2 == 0)
        throw StructureMismatch("odd_structure_check: homogeneity must be an odd integer");
    const int axis = q.normal.axis;
    const int dim = q.dim;
    const long lam = q.lambda.get_num().get_si();

    // P = -x_n q0(x') - x_n^3 (...): no x_n^0 and no x_n^2 terms allowed.
    HomoPoly g1(dim, static_cast<int>(lam) - 1);
    for (const auto& [d, h] : q.P.parts()) {
        if (d != static_cast<int>(lam))
            throw StructureMismatch("odd_structure_check: not homogeneous of degree lambda");
        for (const auto& [a, c] : h.terms()) {
            if (a[axis] == 0 || a[axis] == 2)
                throw StructureMismatch("odd_structure_check: x_n^0 / x_n^2 terms present");
            if (a[axis] == 1) {
                MultiIndex b = a;
                b.set(axis, 0);
                g1.add_term(b, c);
            }
        }
    }
    OddStructure res;
    res.q0 = -g1;

    // Sampled nonnegativity of q0 on L.
    res.q0_nonneg_sampled = true;
    for (const auto& xp : l_samples(dim, axis, 1000)) {
        std::vector<double> x = xp;
        x[static_cast<std::size_t>(axis)] = 0.0;
        if (Poly(res.q0).evaluate(x) < -1e-12) {
            res.q0_nonneg_sampled = false;
            break;
        }
    }
    if (!res.q0_nonneg_sampled) throw StructureMismatch("odd_structure_check: q0 changes sign on L");

    // Solve Laplacian(-x_n q0 + x_n^3 q1) = 0 for q1 in V_{lambda-3}.
    const int dq1 = static_cast<int>(lam) - 3;
    HomoPoly rhs = HomoPoly::axis_linear(dim, axis, 1) * res.q0;  // x_n q0
    rhs = rhs.laplacian();                                        // degree lam-2
    if (dq1 < 0) {
        if (!rhs.is_zero()) throw StructureMismatch("odd_structure_check: no harmonic completion");
        res.q1 = HomoPoly(dim, 0);
        return res;
    }
    // Monomial basis of V_{dq1}.
    std::vector<MultiIndex> basis;
    {
        std::vector<int> stack;
        MultiIndex a;
        std::function<void(int, int)> rec = [&](int d, int left) {
            if (d == dim - 1) {
                a.set(d, left);
                basis.push_back(a);
                return;
            }
            for (int e = 0; e <= left; ++e) {
                a.set(d, e);
                rec(d + 1, left - e);
            }
        };
        rec(0, dq1);
    }
    std::vector<MultiIndex> rows;
    {
        MultiIndex a;
        std::function<void(int, int)> rec = [&](int d, int left) {
            if (d == dim - 1) {
                a.set(d, left);
                rows.push_back(a);
                return;
            }
            for (int e = 0; e <= left; ++e) {
                a.set(d, e);
                rec(d + 1, left - e);
            }
        };
        rec(0, static_cast<int>(lam) - 2);
    }
    auto row_of = [&](const MultiIndex& m) {
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i] == m) return i;
        throw SingularSystem("odd_structure_check: row lookup");
    };
    RatMatrix A(rows.size(), basis.size());
    for (std::size_t j = 0; j < basis.size(); ++j) {
        HomoPoly xj = HomoPoly::monomial(dim, basis[j], 1);
        MultiIndex cube = basis[j];
        cube.set(axis, cube[axis] + 3);
        HomoPoly img = HomoPoly::monomial(dim, cube, 1).laplacian();
        for (const auto& [m, c] : img.terms()) A.at(row_of(m), j) = c;
    }
    std::vector<Rational> b(rows.size(), Rational(0));
    for (const auto& [m, c] : rhs.terms()) b[row_of(m)] = c;
    auto sol = solve_exact(A, b);
    if (!sol) throw StructureMismatch("odd_structure_check: no harmonic completion");
    HomoPoly q1(dim, dq1);
    for (std::size_t j = 0; j < basis.size(); ++j) q1.add_term(basis[j], (*sol)[j]);
    res.q1 = q1;
    return res;
}

namespace {

std::vector<MultiIndex> monomials_of_degree(int dim, int degree) {
    std::vector<MultiIndex> out;
    MultiIndex a;
    std::function<void(int, int)> rec = [&](int d, int left) {
        if (d == dim - 1) {
            a.set(d, left);
            out.push_back(a);
            return;
        }
        for (int e = 0; e <= left; ++e) {
            a.set(d, e);
            rec(d + 1, left - e);
        }
    };
    rec(0, degree);
    return out;
}

std::vector<HomoPoly> harmonic_from_columns(int dim, int degree,
                                            const std::vector<MultiIndex>& cols) {
    if (degree < 2) {
        std::vector<HomoPoly> out;
        for (const auto& a : cols) out.push_back(HomoPoly::monomial(dim, a, 1));
        return out;
    }
    auto rows = monomials_of_degree(dim, degree - 2);
    auto row_of = [&](const MultiIndex& m) {
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i] == m) return i;
        throw SingularSystem("harmonic basis: row lookup");
    };
    RatMatrix A(rows.size(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
        HomoPoly img = HomoPoly::monomial(dim, cols[j], 1).laplacian();
        for (const auto& [m, c] : img.terms()) A.at(row_of(m), j) += c;
    }
    std::vector<HomoPoly> out;
    for (const auto& v : nullspace_exact(A)) {
        HomoPoly h(dim, degree);
        for (std::size_t j = 0; j < cols.size(); ++j) h.add_term(cols[j], v[j]);
        out.push_back(h);
    }
    return out;
}

}  // namespace

std::vector<HomoPoly> harmonic_basis(int dim, int degree) {
    return harmonic_from_columns(dim, degree, monomials_of_degree(dim, degree));
}

std::vector<HomoPoly> harmonic_vanishing_basis(int dim, int degree, int axis) {
    std::vector<MultiIndex> cols;
    for (const auto& a : monomials_of_degree(dim, degree))
        if (a[axis] >= 1) cols.push_back(a);
    return harmonic_from_columns(dim, degree, cols);
}

EnumeratedSpace enumerate_nd(int dim, const Rational& lambda, int axis, Parity parity) {
    EnumeratedSpace out;
    if (lambda.get_den() != 1) {
        // Non-integer even spectrum is known only in dimension 2.
        if (dim == 2) {
            out.admissibility_known = true;
            // handled by catalog_2d; report emptiness here
        } else {
            out.admissibility_known = false;
        }
        return out;
    }
    int m = static_cast<int>(lambda.get_num().get_si());
    if (parity == Parity::Odd) {
        out.basis = harmonic_vanishing_basis(dim, m, axis);
        out.sign_ok_sampled.assign(out.basis.size(), true);
        return out;
    }
    // Even: harmonic, even in x_axis; sampled sign filter on L.
    std::vector<MultiIndex> cols;
    for (const auto& a : monomials_of_degree(dim, m))
        if (a[axis] % 2 == 0) cols.push_back(a);
    out.basis = harmonic_from_columns(dim, m, cols);
    for (const auto& h : out.basis) {
        bool ok = true;
        for (const auto& xp : l_samples(dim, axis, 1000)) {
            std::vector<double> x = xp;
            x[static_cast<std::size_t>(axis)] = 0.0;
            if (Poly(h).evaluate(x) < -1e-12) {
                ok = false;
                break;
            }
        }
        out.sign_ok_sampled.push_back(ok);
    }
    return out;
}

}  // namespace oblab::signorini
