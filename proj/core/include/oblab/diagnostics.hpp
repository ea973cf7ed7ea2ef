#pragma once

#include <map>
#include <string>
#include <vector>

#include "oblab/ansatz.hpp"
#include "oblab/grid.hpp"
#include "oblab/realpoly.hpp"

namespace oblab::diag {

using grid::GridField;
using grid::Point;

// H(r,w) = r^{1-n} int_{dB_r} w^2, estimated by a width-2h shell average with
// a measured-slope curvature correction (the shell mean of a power law
// overshoots the midpoint value by a computable factor).
double compute_H(const GridField& w, const Point& x0, double r);

// D(r,w) = r^{2-n} int_{B_r} |grad w|^2, fourth-order central gradients summed
// with a ramped ball indicator plus the same power-law bias correction.
double compute_D(const GridField& w, const Point& x0, double r);

// (D + gamma r^{2 gamma}) / (H + r^{2 gamma})
double phi_gamma(const GridField& w, const Point& x0, double r, double gamma);
double phi_gamma_from(double H, double D, double r, double gamma);

// W_lambda(r) = r^{-2 lambda} (D - lambda H)
double weiss(const GridField& w, const Point& x0, double r, double lambda);

// Geometric radii (ratio 2^{1/4}) from max(4h, rmin) up to a third of the
// distance to the box boundary, descending.
std::vector<double> geometric_radii(const GridField& g, const Point& x0, double rmin = 0.0,
                                    double rmax = 0.0);

struct FrequencyProfile {
    Point x0;
    double gamma = 0.0;
    double weiss_lambda = 0.0;
    int monneau_k = 0;
    std::vector<double> r;  // descending
    std::vector<double> H, D, phi, W, M;
    double drift_C = 0.0;
    double drift_eps = 0.5;
};

// Full profile of H, D, phi^gamma, W_lambda over the radii; M_k filled when a
// family is supplied (w = u - P_k, M = r^{-2k} H).
FrequencyProfile compute_profile(const GridField& v, const Point& x0, double gamma,
                                 double weiss_lambda, const std::vector<double>& radii);

// u minus a closed-form polynomial centered at x0, sampled on the grid.
GridField subtract_poly(const GridField& u, const poly::RealPoly& p, const Point& x0);

struct MonneauResult {
    std::vector<double> r;
    std::vector<double> M;
    double c_fit = 0.0;
    double eps = 0.5;
};

MonneauResult monneau(const GridField& u, const ansatz::AnsatzFamily& fam, const Point& x0,
                      const std::vector<double>& radii, double eps = 0.5);

struct DriftFit {
    double c_fit = 0.0;
    std::vector<double> pre_violations;   // per consecutive pair, before fit
    std::vector<double> post_violations;  // after applying c_fit
};

// Smallest C >= 0 with value[i+1] + C r[i+1]^eps >= value[i] along the
// descending-radius profile.
DriftFit audit_monotonicity(const std::vector<double>& values, const std::vector<double>& radii,
                            double eps);

struct LipschitzRow {
    double r = 0.0;
    double lhs_tangential = 0.0;  // r * sup_{B_r} |grad' v|
    double lhs_normal = 0.0;      // r * sup_{B_r} |d_n v|
    double rhs_base = 0.0;        // ||v_{theta r}||_{L2(B_2 \ B_{1/2})} + r^{k+2}
    double c_tangential = 0.0;
    double c_normal = 0.0;  // against rhs_base^{1-beta}
};

struct LipschitzTable {
    std::vector<LipschitzRow> rows;
    double c_tangential_fit = 0.0;
    double c_normal_fit = 0.0;
    bool finite = true;
};

LipschitzTable lipschitz_audit(const GridField& u, const ansatz::AnsatzFamily& fam,
                               const Point& x0, const std::vector<double>& radii, double beta,
                               double theta = 1.0);

void write_profile_csv(const FrequencyProfile& p, const std::string& path);

// Minimal SVG log-log polyline plot; series name -> (x, y) pairs.
void write_loglog_svg(const std::string& path, const std::string& title,
                      const std::map<std::string, std::pair<std::vector<double>,
                                                            std::vector<double>>>& series);

}  // namespace oblab::diag
