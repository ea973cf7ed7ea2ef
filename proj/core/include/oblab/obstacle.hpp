#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "oblab/ansatz.hpp"
#include "oblab/grid.hpp"
#include "oblab/realpoly.hpp"

namespace oblab::obstacle {

using grid::GridField;
using grid::Point;

struct SolverParams {
    double omega = 1.8;       // projected SOR relaxation
    double tol = 1e-10;       // complementarity residual target
    long max_sweeps = 400000;
};

/// Discrete obstacle problem: u >= 0, f - L_h u >= 0, u (f - L_h u) = 0 at
/// interior nodes, Dirichlet data on `fixed` nodes (box faces plus optional
/// interior sets). `u_init` carries the Dirichlet values and the warm start.
struct ObstacleProblem {
    GridField f;
    GridField u_init;
    std::vector<std::uint8_t> fixed;
    SolverParams params;
};

// Red-black projected SOR. Bitwise deterministic for any worker count.
// Throws NonConvergence with the final residual.
GridField solve(const ObstacleProblem& prob);

// max over non-fixed nodes of |min(u, f - L_h u)|
double complementarity_residual(const GridField& u, const ObstacleProblem& prob);

struct Manufactured {
    ObstacleProblem prob;
    GridField exact;
    poly::RealPoly u_star;  // closed form of the exact solution
    poly::RealPoly f_star;
    double min_f = 0.0;
};

// u* = (f(x0)/2) A_k^2 with f* = Laplacian(u*), sampled analytically. Box is
// [center - halfwidth, center + halfwidth]^n with `cells` cells per axis.
// Throws BoxTooLarge when min f* <= 0 on the box.
Manufactured manufacture_from_ansatz(const ansatz::AnsatzFamily& fam, double halfwidth,
                                     int cells, SolverParams params = {});

// Generic manufactured problem from closed forms (u*, f = Laplacian u*).
Manufactured manufacture_custom(int dim, double halfwidth, int cells,
                                const std::function<double(const Point&)>& u_star,
                                const std::function<double(const Point&)>& f_star,
                                SolverParams params = {});

// Contact set {u < kappa h^2}.
std::vector<std::uint8_t> contact_mask(const GridField& u, double kappa = 10.0);

struct SingularDetectParams {
    double kappa = 10.0;  // contact extraction, u < kappa h^2
    double tau = 0.25;    // density threshold
    // Density counting uses a tighter indicator: the contact ribbon around a
    // singular hypersurface is ~ 2 sqrt(2 kappa_density) cells wide and its
    // ball density ~ 2w/(pi r) must sit below tau from rmin_cells on, while a
    // regular free boundary keeps density ~ 1/2 at every radius.
    double kappa_density = 1.5;
    int rmin_cells = 10;
    int rmax_cells = 20;
};

// Free-boundary nodes whose contact-set density stays below tau across the
// dyadic radius range. Returns flat node indices.
std::vector<std::size_t> detect_singular_nodes(const GridField& u, const SingularDetectParams& p);

struct MonotoneFamily {
    std::vector<double> ts;
    std::vector<GridField> u;
    GridField f;
    std::vector<std::uint8_t> fixed;
};

struct FamilyProblem {
    GridField f;
    std::vector<std::uint8_t> fixed;
    std::function<double(const Point&, double)> boundary_value;
    SolverParams params;
    std::vector<double> ts;  // strictly increasing
};

// Solves every t (warm-started in t order), verifies nodewise monotonicity.
// Throws MonotonicityViolation reporting the worst node.
MonotoneFamily solve_family(const FamilyProblem& spec);

}  // namespace oblab::obstacle
