#include "oblab/heleshaw.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>
#include <cstdio>
#include <fstream>

namespace oblab::heleshaw {

using nlohmann::ordered_json;

obstacle::FamilyProblem make_family_problem(const Geometry& geo, const std::vector<double>& ts,
                                            obstacle::SolverParams params) {
    const int cells = geo.cells;
    double hw = geo.box_halfwidth;
    auto f = GridField::make(2, {cells + 1, cells + 1, 1}, 2.0 * hw / cells, {-hw, -hw, 0});
    for (auto& v : f.v) v = 1.0;

    std::vector<std::pair<double, double>> disks;  // (center_x, radius)
    if (geo.kind == Geometry::Kind::Pinch) {
        disks = {{-geo.separation, geo.disk_radius}, {geo.separation, geo.disk_radius2}};
    } else if (geo.kind == Geometry::Kind::Disk) {
        disks = {{0.0, geo.disk_radius}};
    }
    std::vector<std::uint8_t> fixed(f.size(), 0);
    std::vector<std::uint8_t> source(f.size(), 0);
    for (int j = 0; j < f.shape[1]; ++j) {
        for (int i = 0; i < f.shape[0]; ++i) {
            std::size_t id = f.index(i, j);
            if (f.is_boundary(i, j)) {
                fixed[id] = 1;
                continue;
            }
            Point x = f.coord(i, j);
            for (auto [cx, rad] : disks) {
                double dx = x[0] - cx, dy = x[1];
                if (dx * dx + dy * dy <= rad * rad) {
                    fixed[id] = 1;
                    source[id] = 1;
                }
            }
        }
    }
    obstacle::FamilyProblem spec;
    spec.f = std::move(f);
    spec.fixed = std::move(fixed);
    spec.params = params;
    spec.ts = ts;
    double outer = geo.outer_value;
    auto src = std::make_shared<std::vector<std::uint8_t>>(std::move(source));
    auto fcopy = spec.f;  // for node lookup inside the closure
    bool constant_kind = geo.kind == Geometry::Kind::ConstantBoundary;
    spec.boundary_value = [src, fcopy, outer, constant_kind](const Point& x, double t) {
        if (constant_kind) return t;
        int i = static_cast<int>(std::round((x[0] - fcopy.origin[0]) / fcopy.h));
        int j = static_cast<int>(std::round((x[1] - fcopy.origin[1]) / fcopy.h));
        std::size_t id = fcopy.index(i, j);
        return (*src)[id] ? t : outer;
    };
    return spec;
}

std::vector<double> refine_pinch_times(const Geometry& geo, double t_lo, double t_hi,
                                       int bisections, int samples, double ratio,
                                       obstacle::SolverParams params) {
    // Probe window: the gap between the two sources, where the pinch lives.
    auto has_central_contact = [&](double t) {
        auto spec = make_family_problem(geo, {t}, params);
        auto fam = obstacle::solve_family(spec);
        const GridField& u = fam.u.front();
        // Hard-contact indicator, matching the singular detector's density
        // mask; the kappa = 10 halo would lag the channel by several steps.
        auto mask = obstacle::contact_mask(u, 1.5);
        double win = geo.separation - std::max(geo.disk_radius, geo.disk_radius2);
        // Flat window across the gap: the channel pinches near y = 0 first,
        // while the receding wedge tips live at larger |y|.
        for (std::size_t id = 0; id < mask.size(); ++id) {
            if (!mask[id]) continue;
            Point x = u.coord_of(id);
            if (std::abs(x[0]) < win && std::abs(x[1]) < std::min(0.4 * win, 3.0 * u.h + 0.02))
                return true;
        }
        return false;
    };
    double lo = t_lo, hi = t_hi;
    if (!has_central_contact(lo) || has_central_contact(hi))
        throw InvalidInput("refine_pinch_times: [t_lo, t_hi] does not bracket the pinch");
    for (int b = 0; b < bisections; ++b) {
        double mid = 0.5 * (lo + hi);
        (has_central_contact(mid) ? lo : hi) = mid;
    }
    // Geometric dt ladder anchored just below the bracketed pinch.
    std::vector<double> ts{lo};
    double span = t_hi - lo;
    double dt = span;
    std::vector<double> dts;
    for (int i = 0; i < samples - 1; ++i) {
        dts.push_back(dt);
        dt /= ratio;
    }
    for (auto it = dts.rbegin(); it != dts.rend(); ++it) ts.push_back(lo + *it);
    return ts;
}

SpaceTimeSingularSet detect_singular_times(const MonotoneFamily& fam,
                                           const obstacle::SingularDetectParams& det) {
    SpaceTimeSingularSet out;
    out.ts = fam.ts;
    // Node -> first time-slice index it was flagged at. One-cell/one-step
    // quantization is expected around a pinch, so a repeat only counts as a
    // graph violation when the time indices are non-adjacent (a stationary
    // region rather than detector smear).
    std::map<std::size_t, std::size_t> first_seen;
    double t_span = fam.ts.empty() ? 0.0 : fam.ts.back() - fam.ts.front();
    for (std::size_t n = 0; n < fam.ts.size(); ++n) {
        const GridField& u = fam.u[n];
        auto singular = obstacle::detect_singular_nodes(u, det);
        out.singular_count_by_t.push_back(static_cast<long>(singular.size()));
        auto mask = obstacle::contact_mask(u, det.kappa);
        long ncontact = 0;
        for (auto m : mask) ncontact += m;
        out.contact_area_by_t.push_back(static_cast<double>(ncontact) * u.h * u.h);
        for (auto id : singular) {
            SingularRecord rec;
            rec.t = fam.ts[n];
            rec.node = id;
            rec.x = u.coord_of(id);
            out.records.push_back(rec);
            auto it = first_seen.find(id);
            if (it == first_seen.end()) {
                first_seen[id] = n;
            } else if (fam.ts[n] - fam.ts[it->second] > 0.125 * t_span) {
                out.graph_violations.push_back({id, {fam.ts[it->second], fam.ts[n]}});
            }
        }
    }
    return out;
}

CleaningResult cleaning_audit(const MonotoneFamily& fam, const Point& x0, double t0, int k,
                              double radius, double c0_cap, double fit_rmin) {
    CleaningResult res;
    const double kappa = 10.0;
    if (fit_rmin <= 0.0 && !fam.u.empty()) fit_rmin = 12.0 * fam.u.front().h;
    res.fit_rmin = fit_rmin;
    std::size_t n0 = 0;
    while (n0 < fam.ts.size() && fam.ts[n0] < t0 - 1e-15) ++n0;
    // Vacuous when u^{t0} is already positive near x0.
    {
        const GridField& u = fam.u[std::min(n0, fam.u.size() - 1)];
        auto mask = obstacle::contact_mask(u, kappa);
        bool any = false;
        for (std::size_t id = 0; id < mask.size(); ++id) {
            if (!mask[id]) continue;
            Point x = u.coord_of(id);
            double d = std::hypot(x[0] - x0[0], x[1] - x0[1]);
            if (d <= radius) {
                any = true;
                break;
            }
        }
        if (!any) {
            res.vacuous = true;
            return res;
        }
    }
    for (std::size_t n = n0; n < fam.ts.size(); ++n) {
        double dt = fam.ts[n] - t0;
        if (dt <= 0) continue;
        const GridField& u = fam.u[n];
        auto mask = obstacle::contact_mask(u, kappa);
        double rmin = 1e300;
        for (std::size_t id = 0; id < mask.size(); ++id) {
            if (!mask[id]) continue;
            Point x = u.coord_of(id);
            double d = std::hypot(x[0] - x0[0], x[1] - x0[1]);
            if (d > radius) continue;
            rmin = std::min(rmin, d);
            double dk = std::pow(std::max(d, u.h), k);
            double c = dt / dk;
            if (c > res.c0) res.c0 = c;
            if (c > c0_cap) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "contact node (%.6g, %.6g) at dt=%.6g needs C0=%.3g",
                              x[0], x[1], dt, c);
                res.violations.push_back(buf);
            }
        }
        if (rmin < 1e300 && rmin > u.h) {
            res.dt.push_back(dt);
            res.cleaned_radius.push_back(rmin);
        }
    }
    // log-log slope of dt against the cleaned radius over the resolvable band.
    double sx = 0, sy = 0, sxx = 0, sxy = 0, cnt = 0;
    for (std::size_t i = 0; i < res.dt.size(); ++i) {
        if (res.cleaned_radius[i] < fit_rmin) continue;
        double lx = std::log(res.cleaned_radius[i]), ly = std::log(res.dt[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        cnt += 1;
    }
    if (cnt >= 2 && cnt * sxx - sx * sx > 1e-12)
        res.exponent = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
    return res;
}

double uniform_monotonicity_constant(const MonotoneFamily& fam,
                                     const std::vector<std::size_t>& K_nodes) {
    if (fam.ts.size() < 2) throw InvalidInput("uniform_monotonicity_constant: need >= 2 times");
    for (std::size_t n = 0; n < fam.ts.size(); ++n)
        for (auto id : K_nodes)
            if (fam.u[n].v[id] <= 0.0)
                throw InvalidInput("uniform_monotonicity_constant: K touches the contact set");
    double c = 1e300;
    for (std::size_t n = 0; n + 1 < fam.ts.size(); ++n) {
        double dt = fam.ts[n + 1] - fam.ts[n];
        if (dt <= 0) continue;
        for (auto id : K_nodes)
            c = std::min(c, (fam.u[n + 1].v[id] - fam.u[n].v[id]) / dt);
    }
    return c == 1e300 ? 0.0 : c;
}

namespace {
std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}
}  // namespace

void write_timeline_csv(const SpaceTimeSingularSet& s, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("write_timeline_csv: cannot open " + path);
    os << "t,singular_nodes,contact_area\n";
    for (std::size_t i = 0; i < s.ts.size(); ++i)
        os << fmt(s.ts[i]) << "," << s.singular_count_by_t[i] << "," << fmt(s.contact_area_by_t[i])
           << "\n";
}

std::string spacetime_to_json(const SpaceTimeSingularSet& s) {
    ordered_json j;
    j["ts"] = s.ts;
    ordered_json recs = ordered_json::array();
    for (const auto& r : s.records)
        recs.push_back({{"t", r.t}, {"node", r.node}, {"x", r.x}});
    j["records"] = recs;
    ordered_json viol = ordered_json::array();
    for (const auto& [id, tpair] : s.graph_violations)
        viol.push_back({{"node", id}, {"t1", tpair.first}, {"t2", tpair.second}});
    j["graph_violations"] = viol;
    j["singular_count_by_t"] = s.singular_count_by_t;
    j["contact_area_by_t"] = s.contact_area_by_t;
    return j.dump(2) + "\n";
}

}  // namespace oblab::heleshaw
