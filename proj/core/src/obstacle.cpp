#include "oblab/obstacle.hpp"

#include <algorithm>
#include <cmath>

#include "oblab/threads.hpp"

namespace oblab::obstacle {

namespace {

// One red-black half sweep over color `color`. Nodes of one color read only
// the other color, so block-parallel execution is race-free and the result is
// independent of the worker count.
void half_sweep_2d(GridField& u, const GridField& f, const std::vector<std::uint8_t>& fixed,
                   double omega, int color) {
    const int nx = u.shape[0], ny = u.shape[1];
    const double h2 = u.h * u.h;
    double* uv = u.v.data();
    const double* fv = f.v.data();
    const std::uint8_t* fx = fixed.data();
    parallel_blocks(static_cast<std::size_t>(ny), [&](std::size_t jb, std::size_t je) {
        for (std::size_t j = std::max<std::size_t>(jb, 1); j < je && j + 1 < static_cast<std::size_t>(ny);
             ++j) {
            std::size_t row = j * static_cast<std::size_t>(nx);
            int istart = 1 + ((static_cast<int>(j) + 1 + color) % 2);
            for (int i = istart; i < nx - 1; i += 2) {
                std::size_t id = row + static_cast<std::size_t>(i);
                if (fx[id]) continue;
                double nb = uv[id - 1] + uv[id + 1] + uv[id - static_cast<std::size_t>(nx)] +
                            uv[id + static_cast<std::size_t>(nx)];
                double gs = 0.25 * (nb - h2 * fv[id]);
                double un = uv[id] + omega * (gs - uv[id]);
                uv[id] = un > 0.0 ? un : 0.0;
            }
        }
    });
}

void half_sweep_3d(GridField& u, const GridField& f, const std::vector<std::uint8_t>& fixed,
                   double omega, int color) {
    const int nx = u.shape[0], ny = u.shape[1], nz = u.shape[2];
    const double h2 = u.h * u.h;
    const std::size_t sx = 1, sy = static_cast<std::size_t>(nx),
                      sz = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    double* uv = u.v.data();
    const double* fv = f.v.data();
    const std::uint8_t* fx = fixed.data();
    parallel_blocks(static_cast<std::size_t>(nz), [&](std::size_t kb, std::size_t ke) {
        for (std::size_t k = std::max<std::size_t>(kb, 1); k < ke && k + 1 < static_cast<std::size_t>(nz);
             ++k) {
            for (int j = 1; j < ny - 1; ++j) {
                std::size_t base = k * sz + static_cast<std::size_t>(j) * sy;
                int istart = 1 + ((static_cast<int>(k) + j + 1 + color) % 2);
                for (int i = istart; i < nx - 1; i += 2) {
                    std::size_t id = base + static_cast<std::size_t>(i);
                    if (fx[id]) continue;
                    double nb = uv[id - sx] + uv[id + sx] + uv[id - sy] + uv[id + sy] +
                                uv[id - sz] + uv[id + sz];
                    double gs = (nb - h2 * fv[id]) / 6.0;
                    double un = uv[id] + omega * (gs - uv[id]);
                    uv[id] = un > 0.0 ? un : 0.0;
                }
            }
        }
    });
}

}  // namespace

double complementarity_residual(const GridField& u, const ObstacleProblem& prob) {
    const int nx = u.shape[0], ny = u.shape[1], nz = u.shape[2];
    const double h2 = u.h * u.h;
    const std::size_t sy = static_cast<std::size_t>(nx),
                      sz = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    double worst = 0.0;
    for (int k = (u.dim == 3 ? 1 : 0); k < (u.dim == 3 ? nz - 1 : 1); ++k) {
        for (int j = 1; j < ny - 1; ++j) {
            for (int i = 1; i < nx - 1; ++i) {
                std::size_t id = static_cast<std::size_t>(k) * sz + static_cast<std::size_t>(j) * sy +
                                 static_cast<std::size_t>(i);
                if (prob.fixed[id]) continue;
                double lap = u.v[id - 1] + u.v[id + 1] + u.v[id - sy] + u.v[id + sy] -
                             2.0 * u.dim * u.v[id];
                if (u.dim == 3) lap += u.v[id - sz] + u.v[id + sz];
                lap /= h2;
                double r = std::min(u.v[id], prob.f.v[id] - lap);
                worst = std::max(worst, std::abs(r));
            }
        }
    }
    return worst;
}

GridField solve(const ObstacleProblem& prob) {
    GridField u = prob.u_init;
    // Projection keeps u >= 0 from the first sweep on.
    for (std::size_t id = 0; id < u.v.size(); ++id)
        if (!prob.fixed[id] && u.v[id] < 0.0) u.v[id] = 0.0;
    double res = 0.0;
    for (long sweep = 0; sweep < prob.params.max_sweeps; ++sweep) {
        if (u.dim == 2) {
            half_sweep_2d(u, prob.f, prob.fixed, prob.params.omega, 0);
            half_sweep_2d(u, prob.f, prob.fixed, prob.params.omega, 1);
        } else {
            half_sweep_3d(u, prob.f, prob.fixed, prob.params.omega, 0);
            half_sweep_3d(u, prob.f, prob.fixed, prob.params.omega, 1);
        }
        if (sweep % 16 == 15 || sweep == prob.params.max_sweeps - 1) {
            res = complementarity_residual(u, prob);
            if (res <= prob.params.tol) return u;
        }
    }
    throw NonConvergence("projected SOR did not reach tolerance", res);
}

namespace {

Manufactured manufacture_impl(int dim, double halfwidth, int cells,
                              const std::function<double(const Point&)>& u_fn,
                              const std::function<double(const Point&)>& f_fn,
                              SolverParams params) {
    std::array<int, 3> shape{cells + 1, cells + 1, dim == 3 ? cells + 1 : 1};
    double h = 2.0 * halfwidth / cells;
    std::array<double, 3> origin{-halfwidth, -halfwidth, dim == 3 ? -halfwidth : 0.0};
    Manufactured m;
    m.prob.f = GridField::make(dim, shape, h, origin);
    m.prob.u_init = GridField::make(dim, shape, h, origin);
    m.exact = GridField::make(dim, shape, h, origin);
    m.prob.fixed.assign(m.prob.f.size(), 0);
    m.prob.params = params;
    m.min_f = 1e300;
    for (int k = 0; k < shape[2]; ++k) {
        for (int j = 0; j < shape[1]; ++j) {
            for (int i = 0; i < shape[0]; ++i) {
                std::size_t id = m.prob.f.index(i, j, k);
                Point x = m.prob.f.coord(i, j, k);
                double fv = f_fn(x), uv = u_fn(x);
                m.prob.f.v[id] = fv;
                m.exact.v[id] = uv;
                m.prob.u_init.v[id] = uv;
                m.min_f = std::min(m.min_f, fv);
                if (m.prob.f.is_boundary(i, j, k)) m.prob.fixed[id] = 1;
            }
        }
    }
    if (m.min_f <= 0.0)
        throw BoxTooLarge("manufactured rhs loses positivity on the box (min f = " +
                          std::to_string(m.min_f) + ")");
    return m;
}

}  // namespace

Manufactured manufacture_from_ansatz(const ansatz::AnsatzFamily& fam, double halfwidth,
                                     int cells, SolverParams params) {
    poly::RealPoly u_star(fam.half_a2);
    poly::RealPoly f_star(fam.half_a2.laplacian());
    auto m = manufacture_impl(
        fam.input.dim, halfwidth, cells, [&](const Point& x) { return u_star.evaluate(x); },
        [&](const Point& x) { return f_star.evaluate(x); }, params);
    m.u_star = u_star;
    m.f_star = f_star;
    return m;
}

Manufactured manufacture_custom(int dim, double halfwidth, int cells,
                                const std::function<double(const Point&)>& u_star,
                                const std::function<double(const Point&)>& f_star,
                                SolverParams params) {
    return manufacture_impl(dim, halfwidth, cells, u_star, f_star, params);
}

std::vector<std::uint8_t> contact_mask(const GridField& u, double kappa) {
    std::vector<std::uint8_t> mask(u.size(), 0);
    double thr = kappa * u.h * u.h;
    for (std::size_t i = 0; i < u.size(); ++i) mask[i] = u.v[i] < thr ? 1 : 0;
    return mask;
}

std::vector<std::size_t> detect_singular_nodes(const GridField& u, const SingularDetectParams& p) {
    auto mask = contact_mask(u, p.kappa_density);
    const int nx = u.shape[0], ny = u.shape[1], nz = u.shape[2];
    const std::size_t sy = static_cast<std::size_t>(nx),
                      sz = static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny);
    std::vector<std::size_t> out;
    auto density = [&](int i, int j, int k, int rc) {
        long in_ball = 0, in_contact = 0;
        for (int dk = (u.dim == 3 ? -rc : 0); dk <= (u.dim == 3 ? rc : 0); ++dk) {
            for (int dj = -rc; dj <= rc; ++dj) {
                for (int di = -rc; di <= rc; ++di) {
                    if (di * di + dj * dj + dk * dk > rc * rc) continue;
                    int ii = i + di, jj = j + dj, kk = k + dk;
                    if (ii < 0 || ii >= nx || jj < 0 || jj >= ny || kk < 0 || kk >= nz) continue;
                    ++in_ball;
                    if (mask[static_cast<std::size_t>(kk) * sz + static_cast<std::size_t>(jj) * sy +
                             static_cast<std::size_t>(ii)])
                        ++in_contact;
                }
            }
        }
        return static_cast<double>(in_contact) / static_cast<double>(in_ball);
    };
    for (int k = 0; k < nz; ++k) {
        for (int j = 1; j < ny - 1; ++j) {
            for (int i = 1; i < nx - 1; ++i) {
                if (u.dim == 3 && (k == 0 || k == nz - 1)) continue;
                std::size_t id = static_cast<std::size_t>(k) * sz + static_cast<std::size_t>(j) * sy +
                                 static_cast<std::size_t>(i);
                if (!mask[id]) continue;
                // free-boundary node: has a positivity neighbor
                bool fb = !mask[id - 1] || !mask[id + 1] || !mask[id - sy] || !mask[id + sy];
                if (u.dim == 3) fb = fb || !mask[id - sz] || !mask[id + sz];
                if (!fb) continue;
                bool singular = true;
                for (int rc = p.rmax_cells; rc >= p.rmin_cells; rc /= 2) {
                    if (density(i, j, k, rc) >= p.tau) {
                        singular = false;
                        break;
                    }
                }
                if (singular) out.push_back(id);
            }
        }
    }
    return out;
}

MonotoneFamily solve_family(const FamilyProblem& spec) {
    MonotoneFamily fam;
    fam.ts = spec.ts;
    fam.f = spec.f;
    fam.fixed = spec.fixed;
    ObstacleProblem prob;
    prob.f = spec.f;
    prob.fixed = spec.fixed;
    prob.params = spec.params;
    prob.u_init = GridField::make(spec.f.dim, spec.f.shape, spec.f.h, spec.f.origin);
    const double mono_tol = 100.0 * spec.params.tol;
    for (std::size_t n = 0; n < spec.ts.size(); ++n) {
        double t = spec.ts[n];
        if (n > 0) prob.u_init = fam.u.back();  // warm start
        for (std::size_t id = 0; id < prob.f.size(); ++id)
            if (prob.fixed[id])
                prob.u_init.v[id] = spec.boundary_value(prob.f.coord_of(id), t);
        GridField u = solve(prob);
        if (n > 0) {
            const GridField& prev = fam.u.back();
            double worst = 0.0;
            std::size_t worst_id = 0;
            for (std::size_t id = 0; id < u.size(); ++id) {
                double d = prev.v[id] - u.v[id];
                if (d > worst) {
                    worst = d;
                    worst_id = id;
                }
            }
            if (worst > mono_tol)
                throw MonotonicityViolation("monotone family violated nodewise ordering", worst_id,
                                            worst);
        }
        fam.u.push_back(std::move(u));
    }
    return fam;
}

}  // namespace oblab::obstacle
