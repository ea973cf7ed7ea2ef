#include "oblab/blowup.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "oblab/signorini.hpp"
#include "oblab/sphere.hpp"
#include "oblab/spheremesh.hpp"

namespace oblab::blowup {

using nlohmann::ordered_json;

namespace {

// Dense double solve, pivoted Gaussian elimination. Small systems only.
std::vector<double> solve_dense(std::vector<std::vector<double>> A, std::vector<double> b) {
    std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t i = c + 1; i < n; ++i)
            if (std::abs(A[i][c]) > std::abs(A[p][c])) p = i;
        std::swap(A[p], A[c]);
        std::swap(b[p], b[c]);
        if (A[c][c] == 0.0) throw SingularSystem("solve_dense: singular");
        for (std::size_t i = c + 1; i < n; ++i) {
            double f = A[i][c] / A[c][c];
            if (f == 0.0) continue;
            for (std::size_t j = c; j < n; ++j) A[i][j] -= f * A[c][j];
            b[i] -= f * b[c];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
        x[i] = s / A[i][i];
    }
    return x;
}

// Cyclic Jacobi for symmetric matrices of size <= 3.
void sym_eigen(std::vector<std::vector<double>> A, std::vector<double>& eig,
               std::vector<std::vector<double>>& vec) {
    std::size_t n = A.size();
    vec.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) vec[i][i] = 1.0;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += A[p][q] * A[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (A[p][q] == 0.0) continue;
                double theta = (A[q][q] - A[p][p]) / (2.0 * A[p][q]);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    double aip = A[i][p], aiq = A[i][q];
                    A[i][p] = c * aip - s * aiq;
                    A[i][q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    double api = A[p][i], aqi = A[q][i];
                    A[p][i] = c * api - s * aqi;
                    A[q][i] = s * api + c * aqi;
                    double vip = vec[i][p], viq = vec[i][q];
                    vec[i][p] = c * vip - s * viq;
                    vec[i][q] = s * vip + c * viq;
                }
            }
        }
    }
    eig.resize(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = A[i][i];
    // ascending eigenvalues, columns follow
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return eig[a] < eig[b]; });
    std::vector<double> e2(n);
    std::vector<std::vector<double>> v2(n, std::vector<double>(n));
    for (std::size_t c = 0; c < n; ++c) {
        e2[c] = eig[order[c]];
        for (std::size_t i = 0; i < n; ++i) v2[i][c] = vec[i][order[c]];
    }
    eig = e2;
    vec = v2;
}

}  // namespace


FitP2Result fit_p2(const GridField& u, const GridField& f, const Point& x0,
                   const std::vector<double>& radii) {
    if (radii.empty()) throw InvalidInput("fit_p2: empty radius band");
    const int n = u.dim;
    double f0 = f.interpolate(x0);
    double rfit = *std::min_element(radii.begin(), radii.end());

    // Unknowns: diagonal entries except the last, then off-diagonals, then a
    // constant and a linear slack for the sub-cell offset of detected centers,
    // then degree-3/4 guard monomials so the expansion's own higher orders do
    // not alias onto the slack (they share parity with it on a ball).
    std::vector<std::pair<int, int>> unk;
    for (int i = 0; i < n - 1; ++i) unk.push_back({i, i});
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) unk.push_back({i, j});
    const std::size_t nquad = unk.size();
    const std::size_t naffine = 1 + static_cast<std::size_t>(n);
    std::vector<MultiIndex> guards;
    {
        MultiIndex a;
        std::function<void(int, int)> rec = [&](int d, int left) {
            if (d == n - 1) {
                a.set(d, left);
                guards.push_back(a);
                return;
            }
            for (int e = 0; e <= left; ++e) {
                a.set(d, e);
                rec(d + 1, left - e);
            }
        };
        rec(0, 3);
        rec(0, 4);
    }
    auto basis_val = [&](std::size_t b, const Point& z) {
        if (b < nquad) {
            auto [i, j] = unk[b];
            if (i == j)
                return 0.5 * (z[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)] -
                              z[static_cast<std::size_t>(n - 1)] * z[static_cast<std::size_t>(n - 1)]);
            return z[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(j)];
        }
        if (b < nquad + naffine) {
            std::size_t extra = b - nquad;
            if (extra == 0) return 1.0;
            return z[extra - 1];
        }
        const MultiIndex& ga = guards[b - nquad - naffine];
        double t = 1.0;
        for (int d = 0; d < n; ++d)
            for (int e = 0; e < ga[d]; ++e) t *= z[static_cast<std::size_t>(d)];
        return t;
    };
    auto offset_val = [&](const Point& z) {
        return 0.5 * f0 * z[static_cast<std::size_t>(n - 1)] * z[static_cast<std::size_t>(n - 1)];
    };

    std::size_t nb = nquad + naffine + guards.size();
    std::vector<std::vector<double>> N(nb, std::vector<double>(nb, 0.0));
    std::vector<double> rhs(nb, 0.0);
    int ric = static_cast<int>(std::ceil(rfit / u.h)) + 1;
    int ci = static_cast<int>(std::round((x0[0] - u.origin[0]) / u.h));
    int cj = static_cast<int>(std::round((x0[1] - u.origin[1]) / u.h));
    int ck = n == 3 ? static_cast<int>(std::round((x0[2] - u.origin[2]) / u.h)) : 0;
    for (int dk = (n == 3 ? -ric : 0); dk <= (n == 3 ? ric : 0); ++dk) {
        for (int dj = -ric; dj <= ric; ++dj) {
            for (int di = -ric; di <= ric; ++di) {
                int i = ci + di, j = cj + dj, k = ck + dk;
                if (i < 0 || i >= u.shape[0] || j < 0 || j >= u.shape[1] || k < 0 || k >= u.shape[2])
                    continue;
                Point x = u.coord(i, j, k);
                Point z(static_cast<std::size_t>(n));
                double rho2 = 0;
                for (int a = 0; a < n; ++a) {
                    z[static_cast<std::size_t>(a)] =
                        x[static_cast<std::size_t>(a)] - x0[static_cast<std::size_t>(a)];
                    rho2 += z[static_cast<std::size_t>(a)] * z[static_cast<std::size_t>(a)];
                }
                if (rho2 > rfit * rfit) continue;
                double y = u.at(i, j, k) - offset_val(z);
                for (std::size_t b = 0; b < nb; ++b) {
                    double pb = basis_val(b, z);
                    rhs[b] += pb * y;
                    for (std::size_t c = 0; c <= b; ++c) N[b][c] += pb * basis_val(c, z);
                }
            }
        }
    }
    for (std::size_t b = 0; b < nb; ++b)
        for (std::size_t c = b + 1; c < nb; ++c) N[b][c] = N[c][b];
    auto a = solve_dense(N, rhs);

    FitP2Result out;
    out.hessian.assign(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
    double diag_sum = 0.0;
    for (std::size_t b = 0; b < nquad; ++b) {
        auto [i, j] = unk[b];
        if (i == j) {
            out.hessian[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = a[b];
            diag_sum += a[b];
        } else {
            out.hessian[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = a[b];
            out.hessian[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = a[b];
        }
    }
    out.hessian[static_cast<std::size_t>(n - 1)][static_cast<std::size_t>(n - 1)] = f0 - diag_sum;
    out.offset = a[nquad];
    out.gradient.assign(static_cast<std::size_t>(n), 0.0);
    for (int d = 0; d < n; ++d)
        out.gradient[static_cast<std::size_t>(d)] = a[nquad + 1 + static_cast<std::size_t>(d)];
    // The slack must stay at the one-cell quantization scale of a detected
    // center; anything larger is not a singular expansion point.
    double gnorm = 0;
    for (double gval : out.gradient) gnorm += gval * gval;
    gnorm = std::sqrt(gnorm);
    double fscale = std::max(1.0, std::abs(f0));
    if (std::abs(out.offset) > 20.0 * u.h * u.h * fscale || gnorm > 3.0 * u.h * fscale)
        throw NotSingular("fit_p2: affine slack exceeds the center quantization scale");

    // p2 = z^T A z / 2
    RealPoly p2(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            MultiIndex mi;
            mi.set(i, mi[i] + 1);
            mi.set(j, mi[j] + 1);
            p2.add_term(mi, 0.5 * out.hessian[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
        }
    }
    out.p2 = p2;

    sym_eigen(out.hessian, out.eigenvalues, out.eigenvectors);
    double emax = 0.0;
    for (double e : out.eigenvalues) emax = std::max(emax, std::abs(e));
    for (double e : out.eigenvalues)
        if (std::abs(e) < 0.05 * std::max(emax, 1e-12)) ++out.stratum_dim;

    // Residual profile and the decay certificate.
    out.radii = radii;
    for (double r : radii) {
        double worst = 0.0;
        int rc = static_cast<int>(std::ceil(r / u.h)) + 1;
        for (int dk = (n == 3 ? -rc : 0); dk <= (n == 3 ? rc : 0); ++dk) {
            for (int dj = -rc; dj <= rc; ++dj) {
                for (int di = -rc; di <= rc; ++di) {
                    int i = ci + di, j = cj + dj, k = ck + dk;
                    if (i < 0 || i >= u.shape[0] || j < 0 || j >= u.shape[1] || k < 0 ||
                        k >= u.shape[2])
                        continue;
                    Point x = u.coord(i, j, k);
                    Point z(static_cast<std::size_t>(n));
                    double rho2 = 0;
                    for (int a2 = 0; a2 < n; ++a2) {
                        z[static_cast<std::size_t>(a2)] =
                            x[static_cast<std::size_t>(a2)] - x0[static_cast<std::size_t>(a2)];
                        rho2 += z[static_cast<std::size_t>(a2)] * z[static_cast<std::size_t>(a2)];
                    }
                    if (rho2 > r * r) continue;
                    double fitval = out.p2.evaluate(z) + out.offset;
                    for (std::size_t b = nquad + 1; b < nb; ++b)
                        fitval += a[b] * basis_val(b, z);
                    worst = std::max(worst, std::abs(u.at(i, j, k) - fitval));
                }
            }
        }
        out.residuals.push_back(worst / (r * r));
    }
    // radii descending: require the small-end mean to sit below the large end.
    std::size_t third = std::max<std::size_t>(1, radii.size() / 3);
    double lo = 0, hi = 0;
    for (std::size_t i = 0; i < third; ++i) hi += out.residuals[i];
    for (std::size_t i = radii.size() - third; i < radii.size(); ++i) lo += out.residuals[i];
    if (!(lo <= hi * 1.05 + 1e-12))
        throw NotSingular("fit_p2: sup |u - p2| / r^2 fails to decay toward the center");
    return out;
}

Point polish_center(const GridField& u, const GridField& f, const Point& x0,
                    const std::vector<double>& radii, int iterations) {
    Point x = x0;
    const int n = u.dim;
    for (int it = 0; it < iterations; ++it) {
        FitP2Result fit;
        try {
            fit = fit_p2(u, f, x, radii);
        } catch (const NotSingular&) {
            break;  // keep the best center so far; the caller's fit decides
        }
        double ann = fit.eigenvalues.back();
        if (std::abs(ann) < 1e-12) break;
        double gn = 0;
        for (int d = 0; d < n; ++d)
            gn += fit.gradient[static_cast<std::size_t>(d)] *
                  fit.eigenvectors[static_cast<std::size_t>(d)][static_cast<std::size_t>(n - 1)];
        double delta = std::clamp(-gn / ann, -2.0 * u.h, 2.0 * u.h);
        for (int d = 0; d < n; ++d)
            x[static_cast<std::size_t>(d)] +=
                delta * fit.eigenvectors[static_cast<std::size_t>(d)][static_cast<std::size_t>(n - 1)];
        if (std::abs(delta) < 1e-3 * u.h) break;
    }
    return x;
}

VanishingBasis vanishing_harmonic_basis(int dim, int degree, int axis) {
    VanishingBasis vb;
    vb.dim = dim;
    vb.degree = degree;
    vb.axis = axis;
    auto raw = signorini::harmonic_vanishing_basis(dim, degree, axis);
    // Exact Gram-Schmidt in the sphere inner product; float once at the end.
    std::vector<HomoPoly> ortho;
    std::vector<Rational> norms2;
    for (auto& b : raw) {
        HomoPoly g = b;
        for (std::size_t j = 0; j < ortho.size(); ++j) {
            Rational c = poly::sphere_inner(g, ortho[j]).per_area / norms2[j];
            if (c != 0) g -= ortho[j] * c;
        }
        if (g.is_zero()) continue;
        ortho.push_back(g);
        norms2.push_back(poly::sphere_inner(g, g).per_area);
    }
    for (std::size_t j = 0; j < ortho.size(); ++j) {
        vb.exact.push_back(ortho[j]);
        double nrm = std::sqrt(to_double(norms2[j]) * poly::sphere_area(dim));
        vb.norms.push_back(nrm);
        vb.real.push_back(RealPoly(ortho[j]) * (1.0 / nrm));
    }
    return vb;
}

namespace {

Rational rational_approx(double x, long max_den) {
    if (!std::isfinite(x)) throw InvalidInput("rational_approx: non-finite");
    bool neg = x < 0;
    double v = std::abs(x);
    long p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double frac = v;
    for (int it = 0; it < 64; ++it) {
        double fl = std::floor(frac);
        if (fl > 1e17) break;
        long a = static_cast<long>(fl);
        long p2 = a * p1 + p0, q2 = a * q1 + q0;
        if (q2 > max_den) break;
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
        double rem = frac - fl;
        if (rem < 1e-15) break;
        frac = 1.0 / rem;
    }
    if (q1 == 0) return Rational(0);
    Rational r = make_rational(p1, q1);
    return neg ? Rational(-r) : r;
}

}  // namespace

RecoverResult recover_next(const GridField& u, const ansatz::AnsatzFamily& fam, const Point& x0,
                           const std::vector<std::vector<double>>& rot,
                           const std::vector<double>& radii, const SphereMesh& mesh) {
    const int n = u.dim;
    const int k = fam.order();
    const int deg = k + 1;
    RecoverResult res;
    res.radii = radii;
    auto vb = vanishing_harmonic_basis(n, deg, fam.input.nu.axis);
    const std::size_t nb = vb.real.size();
    RealPoly pk(fam.p_ansatz);

    // Gram of the floated basis on the mesh (near identity).
    std::vector<std::vector<double>> G(nb, std::vector<double>(nb, 0.0));
    std::vector<std::vector<double>> bvals(nb, std::vector<double>(mesh.points.size(), 0.0));
    for (std::size_t b = 0; b < nb; ++b)
        for (std::size_t s = 0; s < mesh.points.size(); ++s)
            bvals[b][s] = vb.real[b].evaluate(mesh.points[s]);
    for (std::size_t b = 0; b < nb; ++b)
        for (std::size_t c = 0; c <= b; ++c) {
            double acc = 0;
            for (std::size_t s = 0; s < mesh.points.size(); ++s)
                acc += mesh.weights[s] * bvals[b][s] * bvals[c][s];
            G[b][c] = G[c][b] = acc;
        }

    std::vector<double> scale_by_radius;
    for (double r : radii) {
        // Sample v = u - P_k on the shell, in local coordinates.
        std::vector<double> val(mesh.points.size(), 0.0);
        for (std::size_t s = 0; s < mesh.points.size(); ++s) {
            Point ylocal(static_cast<std::size_t>(n));
            for (int a = 0; a < n; ++a) ylocal[static_cast<std::size_t>(a)] =
                r * mesh.points[s][static_cast<std::size_t>(a)];
            Point x(static_cast<std::size_t>(n));
            for (int a = 0; a < n; ++a) {
                double acc = x0[static_cast<std::size_t>(a)];
                for (int b = 0; b < n; ++b)
                    acc += rot[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] *
                           ylocal[static_cast<std::size_t>(b)];
                x[static_cast<std::size_t>(a)] = acc;
            }
            val[s] = u.interpolate_cubic(x) - pk.evaluate(ylocal);
        }
        double rk1 = std::pow(r, deg);
        std::vector<double> m(nb, 0.0);
        double tot = 0.0;
        for (std::size_t s = 0; s < mesh.points.size(); ++s) {
            tot += mesh.weights[s] * val[s] * val[s];
            for (std::size_t b = 0; b < nb; ++b) m[b] += mesh.weights[s] * val[s] * bvals[b][s];
        }
        std::vector<double> coef = nb ? solve_dense(G, m) : std::vector<double>{};
        for (auto& c : coef) c /= rk1;
        res.coeffs_by_radius.push_back(coef);
        // Orthogonal remainder and even-part amplitude, both at unit scale.
        double proj2 = 0.0;
        for (std::size_t b = 0; b < nb; ++b) proj2 += m[b] * coef[b] * rk1;
        double rem = std::sqrt(std::max(0.0, tot - proj2)) / rk1;
        res.residual_by_radius.push_back(rem);
        double ev2 = 0.0;
        for (std::size_t s = 0; s < mesh.points.size(); ++s) {
            double ve = 0.5 * (val[s] + val[mesh.reflect_last[s]]);
            ev2 += mesh.weights[s] * ve * ve;
        }
        res.even_by_radius.push_back(std::sqrt(ev2) / rk1);
        scale_by_radius.push_back(std::sqrt(tot) / rk1);
    }

    // Least-squares a + b r^2 extrapolation of each coefficient.
    res.coeffs.assign(nb, 0.0);
    if (!radii.empty()) {
        double s0 = static_cast<double>(radii.size()), s2 = 0, s4 = 0;
        for (double r : radii) {
            s2 += r * r;
            s4 += r * r * r * r;
        }
        double det = s0 * s4 - s2 * s2;
        for (std::size_t b = 0; b < nb; ++b) {
            double t0 = 0, t2 = 0;
            for (std::size_t i = 0; i < radii.size(); ++i) {
                t0 += res.coeffs_by_radius[i][b];
                t2 += res.coeffs_by_radius[i][b] * radii[i] * radii[i];
            }
            res.coeffs[b] = det != 0.0 ? (s4 * t0 - s2 * t2) / det : t0 / s0;
        }
    }

    // Convergence: the orthogonal remainder (which contains any even part)
    // must decay toward the center, or at least stay a small fraction of the
    // order-(k+1) content (a fitted-frame tilt leaks an r-independent sliver
    // of the odd part into the even channel). Radii are descending.
    double res_large = res.residual_by_radius.front(), res_small = res.residual_by_radius.back();
    double even_large = res.even_by_radius.front(), even_small = res.even_by_radius.back();
    double scale = *std::max_element(scale_by_radius.begin(), scale_by_radius.end());
    scale = std::max(scale, 1e-30);
    bool rem_decays = res_small <= std::max(0.7 * res_large, 1e-8 * scale) ||
                      res_small <= 0.05 * scale;
    bool even_decays = even_small <= std::max(0.7 * even_large, 1e-8 * scale) ||
                       even_small <= 0.05 * scale;
    res.status = (rem_decays && even_decays) ? RecoverStatus::Converged : RecoverStatus::NoConvergence;
    res.even_energy = even_small;
    res.residual = res_small;

    HomoPoly exact(n, deg);
    for (std::size_t b = 0; b < nb; ++b) {
        Rational c = rational_approx(res.coeffs[b] / vb.norms[b], 1l << 24);
        if (c != 0) exact += vb.exact[b] * c;
    }
    res.p_next_exact = exact;
    res.p_next = RealPoly(exact);
    return res;
}

LambdaEstimate estimate_lambda_k(const GridField& u, const ansatz::AnsatzFamily& fam,
                                 const Point& x0, const std::vector<double>& radii, double gamma) {
    const int k = fam.order();
    if (gamma <= 0.0) gamma = k + 1.5;
    GridField w = diag::subtract_poly(u, RealPoly(fam.p_ansatz), x0);
    LambdaEstimate est;
    est.radii = radii;
    std::vector<double> logH, logr;
    for (double r : radii) {
        double H = diag::compute_H(w, x0, r);
        double D = diag::compute_D(w, x0, r);
        est.phi_by_radius.push_back(diag::phi_gamma_from(H, D, r, gamma));
        if (H > 0) {
            logH.push_back(std::log(H));
            logr.push_back(std::log(r));
        }
    }
    est.by_phi = est.phi_by_radius.back();
    // LS slope over the middle of the band.
    std::size_t nn = logH.size();
    std::size_t lo = nn / 4, hi = nn - nn / 4;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double cnt = 0;
    for (std::size_t i = lo; i < hi; ++i) {
        sx += logr[i];
        sy += logH[i];
        sxx += logr[i] * logr[i];
        sxy += logr[i] * logH[i];
        cnt += 1;
    }
    double slope = (cnt * sxy - sx * sy) / std::max(1e-300, cnt * sxx - sx * sx);
    est.by_slope = slope / 2.0;
    double lo_v = std::min(est.by_phi, est.by_slope) - 0.05;
    double hi_v = std::max(est.by_phi, est.by_slope) + 0.05;
    est.band_lo = std::clamp(lo_v, static_cast<double>(k), k + 2.0);
    est.band_hi = std::clamp(hi_v, static_cast<double>(k), k + 2.0);
    est.value = std::clamp(0.5 * (est.by_phi + est.by_slope), static_cast<double>(k), k + 2.0);
    return est;
}

Classification classify(int k, const LambdaEstimate& lam, bool even_decays, double band_delta) {
    Classification c;
    // Everything at or above k+1 first: the truncated frequency saturates at
    // gamma = k + 3/2 there, so a band stretched between the two estimators is
    // expected rather than ambiguous.
    if (lam.band_lo >= k + 1 - band_delta) {
        c.cls = even_decays ? PointClass::Ascends : PointClass::KPlusOneEven;
        return c;
    }
    double w = lam.band_hi - lam.band_lo;
    if (w > 0.5) {
        c.cls = PointClass::Ambiguous;
        c.note = "band too wide";
        return c;
    }
    if (lam.band_hi < k + band_delta) {
        c.cls = PointClass::FrequencyK;
        if (k % 2 == 0) {
            // Even k cannot sit at frequency k; flag as a solver artifact.
            c.anomalous = true;
            c.note = "frequency pinned at even k";
        }
        return c;
    }
    if (lam.band_lo > k + band_delta && lam.band_hi < k + 1 - band_delta) {
        c.cls = PointClass::NonInteger;
        return c;
    }
    c.cls = PointClass::Ambiguous;
    c.note = "band straddles the classification cut";
    return c;
}

namespace {

// Degree-(deg) least-squares Taylor fit of a grid field around x0, in local
// coordinates y (x = x0 + rot y), rationalized for the exact recursion.
// The fit carries two guard degrees so that strong higher-order structure in
// f does not alias onto the low-order coefficients, then truncates.
ansatz::TaylorData fit_taylor(const GridField& f, const Point& x0,
                              const std::vector<std::vector<double>>& rot, int deg, double r) {
    const int n = f.dim;
    const int fit_deg = deg + 2;
    std::vector<MultiIndex> basis;
    {
        MultiIndex a;
        std::function<void(int, int)> rec = [&](int d, int left) {
            if (d == n - 1) {
                a.set(d, left);
                basis.push_back(a);
                return;
            }
            for (int e = 0; e <= left; ++e) {
                a.set(d, e);
                rec(d + 1, left - e);
            }
        };
        for (int total = 0; total <= fit_deg; ++total) rec(0, total);
    }
    // Sample on a local lattice inside the ball.
    std::vector<Point> ys;
    int steps = 6;
    for (int i = -steps; i <= steps; ++i) {
        for (int j = -steps; j <= steps; ++j) {
            for (int k2 = (n == 3 ? -steps : 0); k2 <= (n == 3 ? steps : 0); ++k2) {
                Point y{r * i / steps, r * j / steps};
                if (n == 3) y.push_back(r * k2 / steps);
                double rho2 = 0;
                for (double c : y) rho2 += c * c;
                if (rho2 > r * r) continue;
                ys.push_back(y);
            }
        }
    }
    std::size_t nb = basis.size();
    std::vector<std::vector<double>> N(nb, std::vector<double>(nb, 0.0));
    std::vector<double> rhs(nb, 0.0);
    for (const auto& y : ys) {
        Point x(static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a) {
            double acc = x0[static_cast<std::size_t>(a)];
            for (int b = 0; b < n; ++b)
                acc += rot[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] *
                       y[static_cast<std::size_t>(b)];
            x[static_cast<std::size_t>(a)] = acc;
        }
        double fv = f.interpolate(x);
        std::vector<double> row(nb);
        for (std::size_t b = 0; b < nb; ++b) {
            double t = 1;
            for (int a = 0; a < n; ++a)
                for (int e = 0; e < basis[b][a]; ++e) t *= y[static_cast<std::size_t>(a)];
            row[b] = t;
        }
        for (std::size_t b = 0; b < nb; ++b) {
            rhs[b] += row[b] * fv;
            for (std::size_t c = 0; c <= b; ++c) N[b][c] += row[b] * row[c];
        }
    }
    for (std::size_t b = 0; b < nb; ++b)
        for (std::size_t c = b + 1; c < nb; ++c) N[b][c] = N[c][b];
    auto a = solve_dense(N, rhs);
    poly::Poly taylor(n);
    for (std::size_t b = 0; b < nb; ++b) {
        if (basis[b].degree() > deg) continue;  // drop the guard degrees
        Rational c = rational_approx(a[b], 1l << 24);
        if (basis[b].degree() == 0 && c <= 0) c = rational_approx(std::max(a[b], 1e-6), 1l << 24);
        if (c != 0) taylor.add_part(HomoPoly::monomial(n, basis[b], c));
    }
    ansatz::TaylorData td;
    td.f_taylor = taylor;
    return td;
}

RealPoly to_ambient(const RealPoly& local, const std::vector<std::vector<double>>& rot) {
    // y = rot^T z, so old variable y_i = sum_j rot[j][i] z_j.
    const int n = local.dim();
    std::vector<std::vector<double>> M(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
            rot[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
    return local.compose_linear(M);
}

}  // namespace

StratumReport analyze_point(const GridField& u, const GridField& f, const Point& x0,
                            const PipelineParams& params) {
    StratumReport rep;
    const int n = u.dim;
    auto radii0 = diag::geometric_radii(u, x0, 8.0 * u.h);
    if (radii0.size() < 4) throw RadiusOutOfRange("analyze_point: band too thin");
    Point center = polish_center(u, f, x0, radii0);
    auto radii = diag::geometric_radii(u, center, 8.0 * u.h);
    rep.x0 = center;

    auto p2fit = fit_p2(u, f, center, radii);
    rep.p2 = p2fit.p2;
    rep.stratum_dim = p2fit.stratum_dim;
    if (p2fit.stratum_dim != n - 1) {
        rep.cls.cls = PointClass::Ambiguous;
        rep.notes = "not a top-stratum point; expansion chain not attempted";
        rep.taylor_field = rep.p2;
        return rep;
    }

    // Local frame: tangents first, normal (top eigenvector) last, sign fixed
    // for determinism.
    std::vector<std::vector<double>> rot(static_cast<std::size_t>(n),
                                         std::vector<double>(static_cast<std::size_t>(n), 0.0));
    for (int c = 0; c < n; ++c) {
        // eigenvalues ascending: kernel directions first == tangents first
        double lead = 0.0;
        for (int i = 0; i < n; ++i)
            if (std::abs(p2fit.eigenvectors[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)]) >
                std::abs(lead))
                lead = p2fit.eigenvectors[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
        double sgn = lead >= 0 ? 1.0 : -1.0;
        for (int i = 0; i < n; ++i)
            rot[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] =
                sgn * p2fit.eigenvectors[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
    }

    const SphereMesh& mesh = SphereMesh::get(n, params.mesh_resolution);
    double f0 = f.interpolate(center);

    // Recovery radii: the upper part of the band, where the grid noise is
    // negligible against the r^{k+1} signal.
    std::vector<double> rec_radii;
    double rmax = radii.front();
    for (double r : radii)
        if (r >= params.recover_rmin_frac * rmax && r <= params.recover_rmax_frac * rmax)
            rec_radii.push_back(r);
    if (rec_radii.size() < 3) rec_radii = radii;

    ansatz::AnsatzInput in;
    in.dim = n;
    in.nu = poly::AxisDir{n - 1, +1};
    in.rhs = fit_taylor(f, center, rot, std::max(1, params.maxk - 1), radii.front());
    Rational f0_exact = in.rhs->f0();

    rep.recovered.assign(static_cast<std::size_t>(params.maxk) + 2, RealPoly(n));
    int k = 2;
    while (true) {
        in.order = k;
        in.p.resize(static_cast<std::size_t>(k) + 1, HomoPoly(n, 0));
        for (int j = 3; j <= k; ++j)
            if (in.p[static_cast<std::size_t>(j)].is_zero())
                in.p[static_cast<std::size_t>(j)] = HomoPoly(n, j);
        auto fam = ansatz::build(in);
        // lambda_k on the ambient-frame difference field
        RealPoly pk_ambient = to_ambient(RealPoly(fam.p_ansatz), rot);
        GridField w = diag::subtract_poly(u, pk_ambient, center);
        LambdaEstimate lam;
        {
            double gamma = k + 1.5;
            lam.radii = radii;
            std::vector<double> logH, logr;
            for (double r : radii) {
                double H = diag::compute_H(w, center, r);
                double D = diag::compute_D(w, center, r);
                lam.phi_by_radius.push_back(diag::phi_gamma_from(H, D, r, gamma));
                if (H > 0) {
                    logH.push_back(std::log(H));
                    logr.push_back(std::log(r));
                }
            }
            lam.by_phi = lam.phi_by_radius.back();
            std::size_t nn = logH.size();
            std::size_t lo = nn / 4, hi = std::max(lo + 2, nn - nn / 4);
            hi = std::min(hi, nn);
            double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
            for (std::size_t i = lo; i < hi; ++i) {
                sx += logr[i];
                sy += logH[i];
                sxx += logr[i] * logr[i];
                sxy += logr[i] * logH[i];
                cnt += 1;
            }
            double slope = cnt >= 2 ? (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx) : 0.0;
            lam.by_slope = slope / 2.0;
            lam.band_lo = std::clamp(std::min(lam.by_phi, lam.by_slope) - 0.05,
                                     static_cast<double>(k), k + 2.0);
            lam.band_hi = std::clamp(std::max(lam.by_phi, lam.by_slope) + 0.05,
                                     static_cast<double>(k), k + 2.0);
            lam.value = std::clamp(0.5 * (lam.by_phi + lam.by_slope), static_cast<double>(k),
                                   k + 2.0);
        }
        auto rec = recover_next(u, fam, center, rot, rec_radii, mesh);
        bool even_decays = true;
        if (!rec.even_by_radius.empty()) {
            double content = 0.0;
            for (double c : rec.coeffs) content += c * c;
            content = std::sqrt(content) + rec.residual + rec.even_energy;
            even_decays = rec.even_by_radius.back() <=
                              std::max(0.7 * rec.even_by_radius.front(),
                                       1e-8 * std::max(content, 1e-30)) ||
                          rec.even_energy <= 0.05 * content;
        }
        rep.cls = classify(k, lam, even_decays, params.band_delta);
        rep.lambda_k = lam.value;
        rep.band_lo = lam.band_lo;
        rep.band_hi = lam.band_hi;
        rep.lambda_radii = lam.radii;
        rep.lambda_phi = lam.phi_by_radius;
        rep.k_final = k;
        rep.taylor_field = to_ambient(RealPoly(fam.p_ansatz.project_upto(k)), rot);
        if (rep.cls.cls != PointClass::Ascends || k >= params.maxk) break;
        // Ascend: plant the recovered polynomial (normalized by f(x0)) and go
        // one order up.
        HomoPoly next = rec.p_next_exact * (1 / f0_exact);
        in.p.resize(static_cast<std::size_t>(k) + 2, HomoPoly(n, 0));
        in.p[static_cast<std::size_t>(k) + 1] = next;
        rep.recovered[static_cast<std::size_t>(k) + 1] = to_ambient(rec.p_next * (1.0 / f0), rot);
        ++k;
    }
    return rep;
}

WhitneyResult whitney_check(const std::vector<Point>& xs, const std::vector<RealPoly>& fields,
                            int k) {
    WhitneyResult out;
    if (xs.size() < 2 || xs.size() != fields.size())
        throw InvalidInput("whitney_check: need >= 2 points with fields");
    const int n = fields.front().dim();
    out.c_fit.assign(static_cast<std::size_t>(k) + 1, 0.0);

    std::vector<MultiIndex> alphas;
    {
        MultiIndex a;
        std::function<void(int, int)> rec = [&](int d, int left) {
            if (d == n - 1) {
                a.set(d, left);
                alphas.push_back(a);
                return;
            }
            for (int e = 0; e <= left; ++e) {
                a.set(d, e);
                rec(d + 1, left - e);
            }
        };
        for (int total = 0; total <= k; ++total) rec(0, total);
    }

    // Bucketed maxima per |alpha|: bucket index = floor(log2(dist)). Numerator
    // magnitudes are tracked so rounding-level differences (fields sharing one
    // global polynomial) do not register as variation.
    std::map<std::pair<int, int>, double> bucket_max;
    std::vector<double> deriv_scale(static_cast<std::size_t>(k) + 1, 0.0);
    std::vector<double> num_max(static_cast<std::size_t>(k) + 1, 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < xs.size(); ++j) {
            if (i == j) continue;
            Point d(static_cast<std::size_t>(n));
            double dist2 = 0;
            for (int a = 0; a < n; ++a) {
                d[static_cast<std::size_t>(a)] =
                    xs[i][static_cast<std::size_t>(a)] - xs[j][static_cast<std::size_t>(a)];
                dist2 += d[static_cast<std::size_t>(a)] * d[static_cast<std::size_t>(a)];
            }
            double dist = std::sqrt(dist2);
            if (dist == 0.0) continue;
            int bucket = static_cast<int>(std::floor(std::log2(dist)));
            for (const auto& alpha : alphas) {
                std::size_t order = static_cast<std::size_t>(alpha.degree());
                // d^alpha P_i(0) = alpha! * coeff
                double fact = 1;
                for (int a = 0; a < n; ++a)
                    for (int e = 2; e <= alpha[a]; ++e) fact *= e;
                auto it = fields[i].terms().find(alpha);
                double di0 = fact * (it == fields[i].terms().end() ? 0.0 : it->second);
                double dj = fields[j].derivative(alpha).evaluate(d);
                double ratio = std::abs(di0 - dj) / std::pow(dist, k - static_cast<int>(order) + 1);
                deriv_scale[order] = std::max({deriv_scale[order], std::abs(di0), std::abs(dj)});
                num_max[order] = std::max(num_max[order], std::abs(di0 - dj));
                out.c_fit[order] = std::max(out.c_fit[order], ratio);
                auto key = std::make_pair(static_cast<int>(order), bucket);
                auto bit = bucket_max.find(key);
                if (bit == bucket_max.end() || ratio > bit->second) bucket_max[key] = ratio;
                if (i < j) out.pairs.push_back({i, j, dist, static_cast<int>(order), ratio});
            }
        }
    }
    for (double c : out.c_fit)
        if (!std::isfinite(c)) out.all_finite = false;
    // Stability: adjacent distance buckets must agree within 2x per order.
    // Orders whose differences sit at rounding level carry no constraint.
    double worst = 1.0;
    bool any_signal = false;
    for (int order = 0; order <= k; ++order) {
        std::size_t o = static_cast<std::size_t>(order);
        if (num_max[o] <= 1e-9 * std::max(deriv_scale[o], 1e-30)) continue;
        any_signal = true;
        for (const auto& [key, cmax] : bucket_max) {
            if (key.first != order) continue;
            auto next = bucket_max.find({order, key.second + 1});
            if (next == bucket_max.end()) continue;
            double a = cmax, b = next->second;
            if (a <= 0 || b <= 0) continue;
            worst = std::max(worst, std::max(a / b, b / a));
        }
    }
    out.max_bucket_variation = worst;
    out.pass = out.all_finite && (!any_signal || worst < 2.0);
    return out;
}

std::string report_to_json(const StratumReport& rep) {
    ordered_json j;
    j["x0"] = rep.x0;
    j["stratum_dim"] = rep.stratum_dim;
    j["k_final"] = rep.k_final;
    j["lambda_k"] = rep.lambda_k;
    j["band"] = {rep.band_lo, rep.band_hi};
    const char* names[] = {"FrequencyK", "NonInteger", "KPlusOneEven", "Ascends", "Ambiguous"};
    j["class"] = names[static_cast<int>(rep.cls.cls)];
    j["anomalous"] = rep.cls.anomalous;
    j["whitney_ok"] = rep.whitney_ok;
    j["p2"] = rep.p2.to_text();
    ordered_json recs = ordered_json::object();
    for (std::size_t d = 3; d < rep.recovered.size(); ++d)
        if (!rep.recovered[d].is_zero()) recs[std::to_string(d)] = rep.recovered[d].to_text();
    j["recovered"] = recs;
    j["taylor_field"] = rep.taylor_field.to_text();
    j["notes"] = rep.notes.empty() ? rep.cls.note : rep.notes;
    ordered_json lam = ordered_json::array();
    for (std::size_t i = 0; i < rep.lambda_radii.size(); ++i)
        lam.push_back({{"r", rep.lambda_radii[i]}, {"phi", rep.lambda_phi[i]}});
    j["lambda_by_radius"] = lam;
    return j.dump(2) + "\n";
}

}  // namespace oblab::blowup
