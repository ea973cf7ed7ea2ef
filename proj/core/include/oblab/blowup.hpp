#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oblab/ansatz.hpp"
#include "oblab/diagnostics.hpp"
#include "oblab/grid.hpp"
#include "oblab/spheremesh.hpp"
#include "oblab/realpoly.hpp"

namespace oblab::blowup {

using grid::GridField;
using grid::Point;
using poly::HomoPoly;
using poly::RealPoly;

struct FitP2Result {
    RealPoly p2;                      // centered coordinates, ambient frame
    std::vector<std::vector<double>> hessian;
    std::vector<double> eigenvalues;  // ascending
    std::vector<std::vector<double>> eigenvectors;
    int stratum_dim = 0;              // dim ker of the Hessian
    std::vector<double> radii;
    std::vector<double> residuals;    // sup |u - fit| / r^2 per radius
    // Nuisance offsets soaking up the one-cell quantization of detected
    // centers; a true singular center drives both to zero.
    double offset = 0.0;
    std::vector<double> gradient;
};

// Least-squares convex quadratic with trace constraint tr A = f(x0), fit at
// the smallest radius; constant and linear nuisance terms absorb the center
// quantization. Residual decay across the band is the singularity
// certificate; throws NotSingular when it fails.
FitP2Result fit_p2(const GridField& u, const GridField& f, const Point& x0,
                   const std::vector<double>& radii);

// Newton polish of a detected center along the fitted normal direction,
// driving the nuisance gradient to zero. Returns the shifted point.
Point polish_center(const GridField& u, const GridField& f, const Point& x0,
                    const std::vector<double>& radii, int iterations = 2);

// Exact orthonormalized basis (Gram-Schmidt over Q, floated once) of
// degree-homogeneous harmonic polynomials vanishing on {x_axis = 0}.
struct VanishingBasis {
    int dim, degree, axis;
    std::vector<HomoPoly> exact;    // pairwise sphere-orthogonal, unit norm up to float
    std::vector<RealPoly> real;
    std::vector<double> norms;      // L2(dB1) norms of `exact`
};
VanishingBasis vanishing_harmonic_basis(int dim, int degree, int axis);

enum class RecoverStatus { Converged, NoConvergence };

struct RecoverResult {
    RecoverStatus status = RecoverStatus::Converged;
    HomoPoly p_next_exact;           // local (axis-aligned) frame, rationalized
    RealPoly p_next;                 // same, floating point
    double residual = 0.0;           // orthogonal remainder at the smallest radius
    double even_energy = 0.0;        // persistent even-part amplitude
    std::vector<double> radii;
    std::vector<double> residual_by_radius;
    std::vector<double> even_by_radius;
    std::vector<std::vector<double>> coeffs_by_radius;  // per radius, basis coefficients
    std::vector<double> coeffs;                         // r^2-extrapolated
};

// Projects r^{-(k+1)} v_r onto the degree-(k+1) vanishing-harmonic basis on
// shells sampled through `mesh`; v = u - P_k in the local frame. `rot` maps
// local coordinates to ambient ones (columns = local basis vectors).
RecoverResult recover_next(const GridField& u, const ansatz::AnsatzFamily& fam, const Point& x0,
                           const std::vector<std::vector<double>>& rot,
                           const std::vector<double>& radii, const SphereMesh& mesh);

struct LambdaEstimate {
    double by_phi = 0.0;    // truncated frequency at the small end
    double by_slope = 0.0;  // half slope of log H vs log r
    double value = 0.0;     // clamped midpoint
    double band_lo = 0.0, band_hi = 0.0;
    std::vector<double> radii, phi_by_radius, slope_by_radius;
};

LambdaEstimate estimate_lambda_k(const GridField& u, const ansatz::AnsatzFamily& fam,
                                 const Point& x0, const std::vector<double>& radii,
                                 double gamma = 0.0);

enum class PointClass { FrequencyK, NonInteger, KPlusOneEven, Ascends, Ambiguous };

struct Classification {
    PointClass cls = PointClass::Ambiguous;
    bool anomalous = false;  // k even with frequency stuck at k (solver-artifact indicator)
    std::string note;
};

Classification classify(int k, const LambdaEstimate& lam, bool even_decays, double band_delta = 0.1);

struct StratumReport {
    Point x0;
    RealPoly p2;
    int stratum_dim = 0;
    std::vector<RealPoly> recovered;  // index j holds p_j (ambient frame), j = 3..k
    int k_final = 2;
    double lambda_k = 0.0, band_lo = 0.0, band_hi = 0.0;
    Classification cls;
    bool whitney_ok = true;
    std::vector<double> lambda_radii, lambda_phi;
    RealPoly taylor_field;  // P_{k,x} = pi_{<=k} of the final ansatz, ambient frame
    std::string notes;
};

struct PipelineParams {
    int maxk = 3;
    double band_delta = 0.1;
    int mesh_resolution = 256;
    double recover_rmin_frac = 0.3;  // fraction of the largest usable radius
    double recover_rmax_frac = 1.0;
};

// Full per-point pipeline: fit p2, ascend through the expansion orders,
// classify. Deterministic for fixed inputs.
StratumReport analyze_point(const GridField& u, const GridField& f, const Point& x0,
                            const PipelineParams& params);

struct WhitneyPair {
    std::size_t i = 0, j = 0;
    double dist = 0.0;
    int alpha_order = 0;
    double ratio = 0.0;
};

struct WhitneyResult {
    std::vector<double> c_fit;  // per |alpha| = 0..k
    bool all_finite = true;
    double max_bucket_variation = 0.0;  // across dyadic distance buckets
    bool pass = false;
    std::vector<WhitneyPair> pairs;
};

// Theorem-style compatibility ratios |d^a P_i(0) - d^a P_j(x_i - x_j)| /
// |x_i - x_j|^{k - |a| + 1} for all pairs and |a| <= k.
WhitneyResult whitney_check(const std::vector<Point>& xs, const std::vector<RealPoly>& fields,
                            int k);

std::string report_to_json(const StratumReport& rep);

}  // namespace oblab::blowup
