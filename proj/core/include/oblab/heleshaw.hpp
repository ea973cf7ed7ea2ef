#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oblab/blowup.hpp"
#include "oblab/obstacle.hpp"

namespace oblab::heleshaw {

using grid::GridField;
using grid::Point;
using obstacle::MonotoneFamily;

struct Geometry {
    enum class Kind { ConstantBoundary, Disk, Pinch } kind = Kind::Pinch;
    double box_halfwidth = 2.0;
    int cells = 256;
    double disk_radius = 0.2;
    // Pinch: sources at (-separation, 0) and (+separation, 0); radii may be
    // chosen unequal.
    double disk_radius2 = 0.2;
    double separation = 0.55;
    double outer_value = 0.0;  // Dirichlet cap on the box faces
};

// Brackets the pinch time by bisection on contact emptiness inside the probe
// window, then returns t0-anchored geometrically spaced samples. Every probe
// is one obstacle solve at the geometry's resolution.
std::vector<double> refine_pinch_times(const Geometry& geo, double t_lo, double t_hi,
                                       int bisections, int samples, double ratio,
                                       obstacle::SolverParams params = {});

// Assembles the monotone family problem: f == 1, u = t on the source disks,
// fixed cap on the outer faces.
obstacle::FamilyProblem make_family_problem(const Geometry& geo, const std::vector<double>& ts,
                                            obstacle::SolverParams params = {});

struct SingularRecord {
    double t = 0.0;
    std::size_t node = 0;
    Point x;
};

struct SpaceTimeSingularSet {
    std::vector<SingularRecord> records;
    // Nodes singular at two distinct times (stationary regions).
    std::vector<std::pair<std::size_t, std::pair<double, double>>> graph_violations;
    std::vector<double> ts;
    std::vector<long> singular_count_by_t;
    std::vector<double> contact_area_by_t;
};

SpaceTimeSingularSet detect_singular_times(const MonotoneFamily& fam,
                                           const obstacle::SingularDetectParams& det = {});

struct CleaningResult {
    double c0 = 0.0;        // smallest C0 with no contact node at t - t0 > C0 |x-x0|^k
    double exponent = 0.0;  // log-log fit of (t - t0) vs cleaned radius, resolvable band
    bool vacuous = false;   // no contact near x0 at t0 already
    double fit_rmin = 0.0;  // lower end of the band used by the fit
    std::vector<double> dt, cleaned_radius;
    std::vector<std::string> violations;  // nodes forcing c0 past the cap
};

// Audits the space-time cleaning inequality around a singular record. The
// exponent fit is restricted to cleaned radii above fit_rmin (default 12h,
// under which the one-cell quantization of the contact boundary dominates).
CleaningResult cleaning_audit(const MonotoneFamily& fam, const Point& x0, double t0, int k,
                              double radius = 0.5, double c0_cap = 1e6, double fit_rmin = 0.0);

// min over consecutive t-pairs and x in K of the difference quotient.
// Pre: every node of K keeps u > 0 across the family; throws InvalidInput
// otherwise.
double uniform_monotonicity_constant(const MonotoneFamily& fam,
                                     const std::vector<std::size_t>& K_nodes);

// (t, #singular nodes, contact area) rows.
void write_timeline_csv(const SpaceTimeSingularSet& s, const std::string& path);
std::string spacetime_to_json(const SpaceTimeSingularSet& s);

}  // namespace oblab::heleshaw
