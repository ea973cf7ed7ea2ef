#include "oblab/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "oblab/spheremesh.hpp"
#include <cstdio>
#include <fstream>

namespace oblab::diag {

namespace {

constexpr double kRadiusRatio = 1.189207115002721;  // 2^{1/4}

struct BallWindow {
    int ilo[3], ihi[3];
};

BallWindow window(const GridField& g, const Point& x0, double r) {
    BallWindow w{};
    for (int a = 0; a < g.dim; ++a) {
        double lo = (x0[static_cast<std::size_t>(a)] - r - g.origin[static_cast<std::size_t>(a)]) / g.h;
        double hi = (x0[static_cast<std::size_t>(a)] + r - g.origin[static_cast<std::size_t>(a)]) / g.h;
        w.ilo[a] = std::max(0, static_cast<int>(std::floor(lo)));
        w.ihi[a] = std::min(g.shape[static_cast<std::size_t>(a)] - 1, static_cast<int>(std::ceil(hi)));
    }
    if (g.dim == 2) {
        w.ilo[2] = 0;
        w.ihi[2] = 0;
    }
    return w;
}

void require_inside(const GridField& g, const Point& x0, double r, const char* who) {
    if (r < 4.0 * g.h)
        throw RadiusOutOfRange(std::string(who) + ": r below 4h");
    if (!g.contains_ball(x0, r + 4.5 * g.h))
        throw RadiusOutOfRange(std::string(who) + ": ball leaves the grid");
}

// Sphere-quadrature shell values through cubic interpolation: spectrally
// accurate in angle, O(h^4) from the interpolant. Much tighter than node
// binning, whose lattice raggedness is only O((h/r)^2) with a big constant.
double sphere_mean_sq(const GridField& w, const Point& x0, double r) {
    const SphereMesh& mesh = SphereMesh::get(w.dim);
    double acc = 0.0;
    Point x(static_cast<std::size_t>(w.dim));
    for (std::size_t s = 0; s < mesh.points.size(); ++s) {
        for (int a = 0; a < w.dim; ++a)
            x[static_cast<std::size_t>(a)] =
                x0[static_cast<std::size_t>(a)] + r * mesh.points[s][static_cast<std::size_t>(a)];
        double v = w.interpolate_cubic(x);
        acc += mesh.weights[s] * v * v;
    }
    return acc;
}

// Fourth-order central derivative fields on a window around the ball.
struct GradWindow {
    GridField gx, gy, gz;
    int dim;
};

GradWindow grad_fields(const GridField& w, const Point& x0, double r) {
    GradWindow gw;
    gw.dim = w.dim;
    gw.gx = GridField::make(w.dim, w.shape, w.h, w.origin);
    gw.gy = gw.gx;
    if (w.dim == 3) gw.gz = gw.gx;
    auto win = window(w, x0, r + 2.0 * w.h);
    const std::size_t sy = static_cast<std::size_t>(w.shape[0]),
                      sz = static_cast<std::size_t>(w.shape[0]) * static_cast<std::size_t>(w.shape[1]);
    auto d4 = [&](std::size_t id, std::size_t stride) {
        return (-w.v[id + 2 * stride] + 8.0 * w.v[id + stride] - 8.0 * w.v[id - stride] +
                w.v[id - 2 * stride]) /
               (12.0 * w.h);
    };
    for (int k = win.ilo[2]; k <= win.ihi[2]; ++k) {
        for (int j = win.ilo[1]; j <= win.ihi[1]; ++j) {
            for (int i = win.ilo[0]; i <= win.ihi[0]; ++i) {
                std::size_t id = w.index(i, j, k);
                gw.gx.v[id] = d4(id, 1);
                gw.gy.v[id] = d4(id, sy);
                if (w.dim == 3) gw.gz.v[id] = d4(id, sz);
            }
        }
    }
    return gw;
}

}  // namespace

double compute_H(const GridField& w, const Point& x0, double r) {
    require_inside(w, x0, r, "compute_H");
    return sphere_mean_sq(w, x0, r);
}

double compute_D(const GridField& w, const Point& x0, double r) {
    require_inside(w, x0, r, "compute_D");
    GradWindow gw = grad_fields(w, x0, r);
    const SphereMesh& mesh = SphereMesh::get(w.dim);
    // Gauss-Legendre in radius, sphere mesh in angle.
    static std::vector<double> gl_w;
    static std::vector<double> gl_x = gauss_legendre_nodes(24, gl_w);
    double acc = 0.0;
    Point x(static_cast<std::size_t>(w.dim));
    for (std::size_t q = 0; q < gl_x.size(); ++q) {
        double s = 0.5 * r * (gl_x[q] + 1.0);
        double ws = 0.5 * r * gl_w[q] * std::pow(s, w.dim - 1);
        double ring = 0.0;
        for (std::size_t p = 0; p < mesh.points.size(); ++p) {
            for (int a = 0; a < w.dim; ++a)
                x[static_cast<std::size_t>(a)] = x0[static_cast<std::size_t>(a)] +
                                                 s * mesh.points[p][static_cast<std::size_t>(a)];
            double g1 = gw.gx.interpolate_cubic(x);
            double g2 = gw.gy.interpolate_cubic(x);
            double gg = g1 * g1 + g2 * g2;
            if (w.dim == 3) {
                double g3 = gw.gz.interpolate_cubic(x);
                gg += g3 * g3;
            }
            ring += mesh.weights[p] * gg;
        }
        acc += ws * ring;
    }
    return acc * std::pow(r, 2 - w.dim);
}

double phi_gamma_from(double H, double D, double r, double gamma) {
    double t = std::pow(r, 2.0 * gamma);
    return (D + gamma * t) / (H + t);
}

double phi_gamma(const GridField& w, const Point& x0, double r, double gamma) {
    return phi_gamma_from(compute_H(w, x0, r), compute_D(w, x0, r), r, gamma);
}

double weiss(const GridField& w, const Point& x0, double r, double lambda) {
    double H = compute_H(w, x0, r), D = compute_D(w, x0, r);
    return (D - lambda * H) / std::pow(r, 2.0 * lambda);
}

std::vector<double> geometric_radii(const GridField& g, const Point& x0, double rmin, double rmax) {
    double lo = std::max(rmin, 4.0 * g.h);
    double hi = g.boundary_distance(x0) / 3.0;
    if (rmax > 0.0) hi = std::min(hi, rmax);
    std::vector<double> out;
    for (double r = hi; r >= lo; r /= kRadiusRatio) out.push_back(r);
    return out;  // descending
}

FrequencyProfile compute_profile(const GridField& v, const Point& x0, double gamma,
                                 double weiss_lambda, const std::vector<double>& radii) {
    FrequencyProfile p;
    p.x0 = x0;
    p.gamma = gamma;
    p.weiss_lambda = weiss_lambda;
    p.r = radii;
    for (double r : radii) {
        double H = compute_H(v, x0, r), D = compute_D(v, x0, r);
        p.H.push_back(H);
        p.D.push_back(D);
        p.phi.push_back(phi_gamma_from(H, D, r, gamma));
        p.W.push_back((D - weiss_lambda * H) / std::pow(r, 2.0 * weiss_lambda));
    }
    auto fit = audit_monotonicity(p.phi, p.r, p.drift_eps);
    p.drift_C = fit.c_fit;
    return p;
}

GridField subtract_poly(const GridField& u, const poly::RealPoly& p, const Point& x0) {
    GridField w = u;
    for (std::size_t id = 0; id < w.size(); ++id) {
        Point x = w.coord_of(id);
        for (int a = 0; a < w.dim; ++a) x[static_cast<std::size_t>(a)] -= x0[static_cast<std::size_t>(a)];
        w.v[id] -= p.evaluate(x);
    }
    return w;
}

MonneauResult monneau(const GridField& u, const ansatz::AnsatzFamily& fam, const Point& x0,
                      const std::vector<double>& radii, double eps) {
    GridField w = subtract_poly(u, poly::RealPoly(fam.p_ansatz), x0);
    MonneauResult res;
    res.eps = eps;
    res.r = radii;
    const int k = fam.order();
    for (double r : radii) res.M.push_back(compute_H(w, x0, r) / std::pow(r, 2.0 * k));
    res.c_fit = audit_monotonicity(res.M, radii, eps).c_fit;
    return res;
}

DriftFit audit_monotonicity(const std::vector<double>& values, const std::vector<double>& radii,
                            double eps) {
    DriftFit fit;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        double drop = values[i] - values[i + 1];
        fit.pre_violations.push_back(std::max(0.0, drop));
        if (drop > 0.0) fit.c_fit = std::max(fit.c_fit, drop / std::pow(radii[i + 1], eps));
    }
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        double drop = values[i] - values[i + 1];
        fit.post_violations.push_back(
            std::max(0.0, drop - fit.c_fit * std::pow(radii[i + 1], eps)));
    }
    return fit;
}

LipschitzTable lipschitz_audit(const GridField& u, const ansatz::AnsatzFamily& fam,
                               const Point& x0, const std::vector<double>& radii, double beta,
                               double theta) {
    GridField v = subtract_poly(u, poly::RealPoly(fam.p_ansatz), x0);
    const int k = fam.order();
    const int axis = fam.input.nu.axis;
    LipschitzTable tab;
    const std::size_t sy = static_cast<std::size_t>(v.shape[0]);
    const std::size_t sz = sy * static_cast<std::size_t>(v.shape[1]);
    for (double r : radii) {
        if (!v.contains_ball(x0, 2.0 * theta * r + 2.0 * v.h))
            throw RadiusOutOfRange("lipschitz_audit: annulus leaves the grid");
        LipschitzRow row;
        row.r = r;
        // sup of |grad v| components over B_r, split tangential/normal
        auto win = window(v, x0, r);
        double sup_t = 0.0, sup_n = 0.0;
        for (int kk = win.ilo[2]; kk <= win.ihi[2]; ++kk) {
            for (int j = std::max(1, win.ilo[1]); j <= std::min(v.shape[1] - 2, win.ihi[1]); ++j) {
                for (int i = std::max(1, win.ilo[0]); i <= std::min(v.shape[0] - 2, win.ihi[0]); ++i) {
                    if (v.dim == 3 && (kk < 1 || kk > v.shape[2] - 2)) continue;
                    Point x = v.coord(i, j, kk);
                    double rho2 = 0;
                    for (int a = 0; a < v.dim; ++a) {
                        double d = x[static_cast<std::size_t>(a)] - x0[static_cast<std::size_t>(a)];
                        rho2 += d * d;
                    }
                    if (rho2 > r * r) continue;
                    std::size_t id = v.index(i, j, kk);
                    for (int a = 0; a < v.dim; ++a) {
                        std::size_t stride = a == 0 ? 1 : (a == 1 ? sy : sz);
                        double g = (v.v[id + stride] - v.v[id - stride]) / (2.0 * v.h);
                        if (a == axis)
                            sup_n = std::max(sup_n, std::abs(g));
                        else
                            sup_t = std::max(sup_t, std::abs(g));
                    }
                }
            }
        }
        row.lhs_tangential = r * sup_t;
        row.lhs_normal = r * sup_n;
        // || v_{theta r} ||_{L2(B_2 \ B_{1/2})} = ((theta r)^{-n} int_{theta r/2 <= |x| <= 2 theta r} v^2)^{1/2}
        double tr = theta * r;
        auto win2 = window(v, x0, 2.0 * tr);
        double acc = 0.0;
        for (int kk = win2.ilo[2]; kk <= win2.ihi[2]; ++kk) {
            for (int j = win2.ilo[1]; j <= win2.ihi[1]; ++j) {
                for (int i = win2.ilo[0]; i <= win2.ihi[0]; ++i) {
                    Point x = v.coord(i, j, kk);
                    double rho2 = 0;
                    for (int a = 0; a < v.dim; ++a) {
                        double d = x[static_cast<std::size_t>(a)] - x0[static_cast<std::size_t>(a)];
                        rho2 += d * d;
                    }
                    double rho = std::sqrt(rho2);
                    if (rho < 0.5 * tr || rho > 2.0 * tr) continue;
                    double val = v.at(i, j, kk);
                    acc += val * val;
                }
            }
        }
        acc *= std::pow(v.h, v.dim) / std::pow(tr, v.dim);
        row.rhs_base = std::sqrt(acc) + std::pow(r, k + 2);
        if (row.rhs_base > 0.0) {
            row.c_tangential = row.lhs_tangential / row.rhs_base;
            row.c_normal = row.lhs_normal / std::pow(row.rhs_base, 1.0 - beta);
        } else if (row.lhs_tangential > 0.0 || row.lhs_normal > 0.0) {
            tab.finite = false;
        }
        tab.c_tangential_fit = std::max(tab.c_tangential_fit, row.c_tangential);
        tab.c_normal_fit = std::max(tab.c_normal_fit, row.c_normal);
        tab.rows.push_back(row);
    }
    return tab;
}

namespace {
std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}
}  // namespace

void write_profile_csv(const FrequencyProfile& p, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("write_profile_csv: cannot open " + path);
    os << "r,H,D,phi_gamma,W_lambda,M_k\n";
    for (std::size_t i = 0; i < p.r.size(); ++i) {
        os << fmt(p.r[i]) << "," << fmt(p.H[i]) << "," << fmt(p.D[i]) << "," << fmt(p.phi[i])
           << "," << fmt(p.W[i]) << "," << (i < p.M.size() ? fmt(p.M[i]) : "") << "\n";
    }
}

void write_loglog_svg(const std::string& path, const std::string& title,
                      const std::map<std::string, std::pair<std::vector<double>,
                                                            std::vector<double>>>& series) {
    const double W = 640, Hh = 480, ml = 60, mb = 40;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& [name, xy] : series) {
        for (std::size_t i = 0; i < xy.first.size(); ++i) {
            if (xy.first[i] <= 0 || xy.second[i] <= 0) continue;
            xmin = std::min(xmin, xy.first[i]);
            xmax = std::max(xmax, xy.first[i]);
            ymin = std::min(ymin, xy.second[i]);
            ymax = std::max(ymax, xy.second[i]);
        }
    }
    if (xmin >= xmax || ymin >= ymax) {
        xmin = ymin = 0.1;
        xmax = ymax = 1.0;
    }
    auto X = [&](double x) { return ml + (std::log(x) - std::log(xmin)) /
                                       (std::log(xmax) - std::log(xmin)) * (W - ml - 20); };
    auto Y = [&](double y) { return Hh - mb - (std::log(y) - std::log(ymin)) /
                                              (std::log(ymax) - std::log(ymin)) * (Hh - mb - 30); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"};
    std::ofstream os(path);
    if (!os) throw IoError("write_loglog_svg: cannot open " + path);
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << Hh << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<text x='20' y='20' font-size='14'>" << title << " (log-log)</text>\n";
    int ci = 0;
    double ly = 40;
    for (const auto& [name, xy] : series) {
        const char* col = colors[ci++ % 5];
        os << "<polyline fill='none' stroke='" << col << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < xy.first.size(); ++i) {
            if (xy.first[i] <= 0 || xy.second[i] <= 0) continue;
            os << X(xy.first[i]) << "," << Y(xy.second[i]) << " ";
        }
        os << "'/>\n<text x='" << W - 150 << "' y='" << ly << "' font-size='12' fill='" << col
           << "'>" << name << "</text>\n";
        ly += 16;
    }
    os << "</svg>\n";
}

}  // namespace oblab::diag
