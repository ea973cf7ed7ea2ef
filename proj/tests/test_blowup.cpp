#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "oblab/blowup.hpp"
#include "oblab/obstacle.hpp"
#include "oblab/sphere.hpp"

using namespace oblab;
using namespace oblab::blowup;
using grid::GridField;
using grid::Point;

namespace {

GridField sample_field(int cells, double halfwidth,
                       const std::function<double(double, double)>& f) {
    auto g = GridField::make(2, {cells + 1, cells + 1, 1}, 2 * halfwidth / cells,
                             {-halfwidth, -halfwidth, 0});
    for (int j = 0; j <= cells; ++j)
        for (int i = 0; i <= cells; ++i) {
            auto x = g.coord(i, j);
            g.at(i, j) = f(x[0], x[1]);
        }
    return g;
}

ansatz::AnsatzInput k_input(int order, const Rational& s) {
    ansatz::AnsatzInput in;
    in.dim = 2;
    in.order = order;
    in.nu = poly::AxisDir{1, +1};
    in.p.resize(static_cast<std::size_t>(order) + 1, poly::HomoPoly(2, 0));
    for (int j = 3; j <= order; ++j) in.p[static_cast<std::size_t>(j)] = poly::HomoPoly(2, j);
    if (order >= 3) in.p[3] = poly::parse_homopoly_text("1 : 0 3\n-3 : 2 1", 2, 3) * s;
    return in;
}

std::vector<std::vector<double>> identity2{{1, 0}, {0, 1}};

}  // namespace

TEST_CASE("fit_p2 exact quadratics") {
    auto g = sample_field(256, 0.5, [](double, double y) { return 0.5 * y * y; });
    auto f = sample_field(256, 0.5, [](double, double) { return 1.0; });
    auto radii = diag::geometric_radii(g, {0, 0}, 8 * g.h);
    auto fit = fit_p2(g, f, {0, 0}, radii);
    CHECK(fit.stratum_dim == 1);
    CHECK(fit.p2.evaluate({0.3, 0.4}) == doctest::Approx(0.08).epsilon(1e-8));
    CHECK(std::abs(fit.eigenvectors[1][1]) == doctest::Approx(1.0).epsilon(1e-9));

    auto gr = sample_field(256, 0.5, [](double x, double y) { return 0.25 * (x * x + y * y); });
    auto fr = sample_field(256, 0.5, [](double, double) { return 1.0; });
    auto fit0 = fit_p2(gr, fr, {0, 0}, radii);
    CHECK(fit0.stratum_dim == 0);
}

TEST_CASE("fit_p2 rejects non-singular expansions") {
    // a strong linear term puts the nearest singular point many cells away
    auto g = sample_field(256, 0.5, [](double, double y) { return 0.5 * y * y + 0.05 * y; });
    auto f = sample_field(256, 0.5, [](double, double) { return 1.0; });
    auto radii = diag::geometric_radii(g, {0, 0}, 8 * g.h);
    CHECK_THROWS_AS(fit_p2(g, f, {0, 0}, radii), NotSingular);
    // a sub-cell offset is absorbed by the affine slack and polished away
    auto g2 = sample_field(256, 0.5, [](double, double y) {
        return 0.5 * (y + 0.002) * (y + 0.002);
    });
    auto fit = fit_p2(g2, f, {0, 0}, radii);
    CHECK(fit.stratum_dim == 1);
    auto polished = polish_center(g2, f, {0, 0}, radii);
    CHECK(polished[1] == doctest::Approx(-0.002).epsilon(0.05));
}

TEST_CASE("vanishing harmonic basis") {
    auto vb2 = vanishing_harmonic_basis(2, 4, 1);
    REQUIRE(vb2.exact.size() == 1);
    CHECK(vb2.exact[0].laplacian().is_zero());
    CHECK(vb2.exact[0].vanishes_on_axis_plane(1));

    auto vb3 = vanishing_harmonic_basis(3, 3, 2);
    REQUIRE(vb3.exact.size() == 3);
    for (std::size_t i = 0; i < vb3.exact.size(); ++i) {
        CHECK(vb3.exact[i].laplacian().is_zero());
        CHECK(vb3.exact[i].vanishes_on_axis_plane(2));
        for (std::size_t j = 0; j < i; ++j)
            CHECK(poly::sphere_inner(vb3.exact[i], vb3.exact[j]).per_area == 0);
        CHECK(poly::sphere_inner(vb3.exact[i], vb3.exact[i]).value ==
              doctest::Approx(vb3.norms[i] * vb3.norms[i]));
    }
}

TEST_CASE("recover planted p3 from exactly sampled data") {
    const Rational s = make_rational(1, 8);
    auto fam3 = ansatz::build(k_input(3, s));
    poly::RealPoly ustar(fam3.half_a2);
    auto u = sample_field(256, 0.4, [&](double x, double y) { return ustar.evaluate({x, y}); });

    auto fam2 = ansatz::build(k_input(2, 0));
    auto radii = diag::geometric_radii(u, {0, 0}, 8 * u.h);
    std::vector<double> rec_radii(radii.begin(), radii.begin() + 5);
    const auto& mesh = SphereMesh::get(2);
    auto rec = recover_next(u, fam2, {0, 0}, identity2, rec_radii, mesh);
    CHECK(rec.status == RecoverStatus::Converged);
    poly::RealPoly target(fam3.input.p[3]);
    poly::RealPoly diff = rec.p_next - target;
    CHECK(diff.coeff_norm() < 0.005 * target.coeff_norm());

    auto fam3z = ansatz::build(k_input(3, 0));
    poly::RealPoly uz(fam3z.half_a2);
    auto u0 = sample_field(256, 0.4, [&](double x, double y) { return uz.evaluate({x, y}); });
    auto rec0 = recover_next(u0, fam2, {0, 0}, identity2, rec_radii, mesh);
    CHECK(rec0.p_next.coeff_norm() < 1e-10);
}

TEST_CASE("even perturbation stalls the recovery") {
    // synthetic field: not a PDE solution, exercises the estimator only
    auto u = sample_field(256, 0.4, [](double x, double y) {
        return 0.5 * y * y + 0.01 * (x * x * x - 3.0 * x * y * y);
    });
    auto fam2 = ansatz::build(k_input(2, 0));
    auto radii = diag::geometric_radii(u, {0, 0}, 8 * u.h);
    std::vector<double> rec_radii(radii.begin(), radii.begin() + 5);
    auto rec = recover_next(u, fam2, {0, 0}, identity2, rec_radii, SphereMesh::get(2));
    CHECK(rec.status == RecoverStatus::NoConvergence);
    CHECK(rec.even_energy > 0.005);
    CHECK(rec.p_next.coeff_norm() < 1e-6);
}

TEST_CASE("lambda estimate on a synthetic non-integer profile") {
    auto u = sample_field(256, 1.0, [](double x, double y) {
        double r = std::hypot(x, y);
        if (r == 0) return 0.0;
        double th = std::atan2(std::abs(y), x);
        return 0.5 * y * y + 0.3 * std::pow(r, 3.5) * std::cos(3.5 * th);
    });
    auto fam3 = ansatz::build(k_input(3, 0));
    auto radii = diag::geometric_radii(u, {0, 0}, 8 * u.h);
    auto est = estimate_lambda_k(u, fam3, {0, 0}, radii);
    CHECK(est.value == doctest::Approx(3.5).epsilon(0.03));
    auto cls = classify(3, est, true);
    CHECK(cls.cls == PointClass::NonInteger);
}

TEST_CASE("classification bands") {
    auto mk = [](double lo, double hi) {
        LambdaEstimate e;
        e.band_lo = lo;
        e.band_hi = hi;
        e.value = 0.5 * (lo + hi);
        return e;
    };
    CHECK(classify(3, mk(3.0, 3.04), true).cls == PointClass::FrequencyK);
    CHECK_FALSE(classify(3, mk(3.0, 3.04), true).anomalous);
    auto an = classify(2, mk(2.0, 2.04), true);
    CHECK(an.cls == PointClass::FrequencyK);
    CHECK(an.anomalous);
    CHECK(classify(3, mk(3.4, 3.6), true).cls == PointClass::NonInteger);
    CHECK(classify(3, mk(3.95, 4.1), true).cls == PointClass::Ascends);
    CHECK(classify(3, mk(3.95, 4.1), false).cls == PointClass::KPlusOneEven);
    CHECK(classify(3, mk(3.0, 4.0), true).cls == PointClass::Ambiguous);
}

TEST_CASE("analyze_point walks the expansion chain") {
    const Rational s = make_rational(1, 8);
    auto fam3 = ansatz::build(k_input(3, s));
    poly::RealPoly ustar(fam3.half_a2);
    poly::RealPoly fstar(fam3.half_a2.laplacian());
    auto u = sample_field(256, 0.4, [&](double x, double y) { return ustar.evaluate({x, y}); });
    auto f = sample_field(256, 0.4, [&](double x, double y) { return fstar.evaluate({x, y}); });
    PipelineParams pp;
    pp.maxk = 3;
    auto rep = analyze_point(u, f, {0, 0}, pp);
    CHECK(rep.stratum_dim == 1);
    CHECK(rep.k_final == 3);
    CHECK(rep.cls.cls == PointClass::Ascends);
    CHECK(rep.lambda_k > 4.0);
    poly::RealPoly target(fam3.input.p[3]);
    CHECK((rep.recovered[3] - target).coeff_norm() < 0.01 * target.coeff_norm());
    auto rep2 = analyze_point(u, f, {0, 0}, pp);
    CHECK(rep2.lambda_k == rep.lambda_k);
    CHECK(rep2.cls.cls == rep.cls.cls);
    CHECK(report_to_json(rep2) == report_to_json(rep));

    auto ue = sample_field(256, 0.4, [](double x, double y) {
        return 0.5 * y * y + 0.3 * (x * x * x - 3.0 * x * y * y);
    });
    auto fe = sample_field(256, 0.4, [](double, double) { return 1.0; });
    auto repe = analyze_point(ue, fe, {0, 0}, pp);
    CHECK(repe.cls.cls == PointClass::KPlusOneEven);
}

TEST_CASE("whitney check") {
    poly::RealPoly P(2);
    P.add_term(MultiIndex{}, 0.7);
    {
        MultiIndex a;
        a.set(0, 2);
        P.add_term(a, 1.3);
        MultiIndex b;
        b.set(0, 1);
        b.set(1, 2);
        P.add_term(b, -0.4);
    }
    std::vector<Point> xs;
    std::vector<poly::RealPoly> fields;
    for (int i = 0; i < 5; ++i) {
        double t = -0.4 + 0.2 * i;
        xs.push_back({t, 0.0});
        fields.push_back(P.shift({t, 0.0}));  // P_{k,x}(h) = P(x + h)
    }
    auto res = whitney_check(xs, fields, 3);
    CHECK(res.all_finite);
    CHECK(res.pass);
    for (double c : res.c_fit) CHECK(c < 1e-9);

    auto bad_fields = fields;
    MultiIndex cub;
    cub.set(0, 3);
    bad_fields[2] = bad_fields[2] + poly::RealPoly::monomial(2, cub, 1.0);
    auto res_bad = whitney_check(xs, bad_fields, 3);
    CHECK_FALSE(res_bad.pass);
}
