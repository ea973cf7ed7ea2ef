// lab: command-line front end for the obstacle-problem laboratory.
//
// Subcommands: ansatz, solve, freq, blowup, signorini, heleshaw, run, report.
// Exit codes: 0 = all audits pass, 1 = audit failure, 2 = configuration/IO.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "oblab/ansatz.hpp"
#include "oblab/blowup.hpp"
#include "oblab/campaign.hpp"
#include "oblab/diagnostics.hpp"
#include "oblab/heleshaw.hpp"
#include "oblab/obstacle.hpp"
#include "oblab/signorini.hpp"

using namespace oblab;
using nlohmann::ordered_json;

namespace {

std::string slurp(const std::string& path) { return campaign::read_file(path); }

void spit(const std::string& path, const std::string& bytes) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

int run_ansatz(int dim, int order, int nu_axis, int nu_sign, const std::string& p_files,
               const std::string& rhs_file, const std::string& out) {
    ansatz::AnsatzInput in;
    in.dim = dim;
    in.order = order;
    in.nu = poly::AxisDir{nu_axis, nu_sign};
    in.p.resize(static_cast<std::size_t>(order) + 1, poly::HomoPoly(dim, 0));
    for (int j = 3; j <= order; ++j) in.p[static_cast<std::size_t>(j)] = poly::HomoPoly(dim, j);
    // p_files: comma-separated degree=path entries, e.g. "3=p3.txt,4=p4.txt"
    std::stringstream ss(p_files);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto eq = item.find('=');
        if (eq == std::string::npos) throw ConfigInvalid("--p expects degree=path entries");
        int deg = std::stoi(item.substr(0, eq));
        if (deg < 3 || deg > order) throw ConfigInvalid("--p degree out of range");
        in.p[static_cast<std::size_t>(deg)] =
            poly::parse_homopoly_text(slurp(item.substr(eq + 1)), dim, deg);
    }
    if (!rhs_file.empty()) {
        ansatz::TaylorData td;
        td.f_taylor = poly::parse_poly_text(slurp(rhs_file), dim);
        in.rhs = td;
    }
    auto fam = ansatz::build(in);
    spit(out, ansatz::family_to_json(fam));
    std::cout << "family order " << order << " written to " << out << "\n";
    return 0;
}

int run_solve(const std::string& config_path, const std::string& out,
              const std::string& f_out, const std::string& contact_csv) {
    ordered_json j = ordered_json::parse(slurp(config_path));
    std::string kind = j.at("kind").get<std::string>();
    int cells = j.at("cells").get<int>();
    double hw = j.at("halfwidth").get<double>();
    obstacle::SolverParams params;
    params.omega = j.value("omega", 1.8);
    params.tol = j.value("tol", 1e-10);
    params.max_sweeps = j.value("max_sweeps", 400000l);
    if (!(params.omega > 0 && params.omega < 2)) throw ConfigInvalid("omega must be in (0,2)");
    if (cells < 8) throw ConfigInvalid("cells too small");
    if (!(hw > 0)) throw ConfigInvalid("halfwidth must be positive");

    obstacle::Manufactured m;
    if (kind == "family") {
        auto fam = ansatz::family_from_json(slurp(j.at("family").get<std::string>()));
        m = obstacle::manufacture_from_ansatz(fam, hw, cells, params);
    } else if (kind == "poly_boundary") {
        // f constant, Dirichlet data from a polynomial in the config
        int dim = j.value("dim", 2);
        auto g = poly::parse_poly_text(j.at("g").get<std::string>(), dim);
        double fconst = j.value("f", 1.0);
        poly::RealPoly gr(g);
        m = obstacle::manufacture_custom(
            dim, hw, cells, [&](const grid::Point& x) { return gr.evaluate(x); },
            [&](const grid::Point&) { return fconst; }, params);
    } else if (kind == "cos_bump") {
        double eps = j.value("eps", 0.02);
        m = obstacle::manufacture_custom(
            2, hw, cells,
            [&](const grid::Point& x) {
                return x[1] * x[1] + eps * (1.0 - std::cos(2.0 * M_PI * x[0]));
            },
            [&](const grid::Point& x) {
                return 2.0 + eps * 4.0 * M_PI * M_PI * std::cos(2.0 * M_PI * x[0]);
            },
            params);
    } else {
        throw ConfigInvalid("unknown problem kind '" + kind + "'");
    }
    if (j.value("cold_start", false))
        for (std::size_t i = 0; i < m.prob.u_init.size(); ++i)
            if (!m.prob.fixed[i]) m.prob.u_init.v[i] = 0.0;
    auto u = obstacle::solve(m.prob);
    grid::write_grid(u, out);
    if (!f_out.empty()) grid::write_grid(m.prob.f, f_out);
    if (!contact_csv.empty()) {
        auto mask = obstacle::contact_mask(u);
        grid::GridField ind = u;
        for (std::size_t i = 0; i < ind.size(); ++i) ind.v[i] = mask[i] ? 1.0 : 0.0;
        grid::write_csv(ind, contact_csv);
    }
    std::cout << "solved " << kind << " at " << cells << "^" << u.dim << " to tol "
              << params.tol << "\n";
    return 0;
}

int run_freq(const std::string& u_path, const std::string& family_path, double cx, double cy,
             double gamma, double weiss_lambda, const std::string& out, const std::string& svg) {
    auto u = grid::read_grid(u_path);
    grid::Point x0{cx, cy};
    diag::FrequencyProfile prof;
    if (!family_path.empty()) {
        auto fam = ansatz::family_from_json(slurp(family_path));
        if (gamma <= 0) gamma = fam.order() + 1.5;
        auto v = diag::subtract_poly(u, poly::RealPoly(fam.p_ansatz), x0);
        auto radii = diag::geometric_radii(v, x0, 8 * v.h);
        prof = diag::compute_profile(v, x0, gamma, weiss_lambda, radii);
        auto mon = diag::monneau(u, fam, x0, radii);
        prof.M = mon.M;
        prof.monneau_k = fam.order();
    } else {
        if (gamma <= 0) gamma = 2.5;
        auto radii = diag::geometric_radii(u, x0, 8 * u.h);
        prof = diag::compute_profile(u, x0, gamma, weiss_lambda, radii);
    }
    diag::write_profile_csv(prof, out);
    if (!svg.empty()) {
        std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
        series["H"] = {prof.r, prof.H};
        series["D"] = {prof.r, prof.D};
        diag::write_loglog_svg(svg, "frequency profile", series);
    }
    auto fit = diag::audit_monotonicity(prof.phi, prof.r, prof.drift_eps);
    double worst = 0;
    for (double v : fit.post_violations) worst = std::max(worst, v);
    std::cout << "profile with " << prof.r.size() << " radii, drift C=" << fit.c_fit
              << ", residual violation " << worst << "\n";
    return worst > 1e-6 ? 1 : 0;
}

int run_blowup(const std::string& u_path, const std::string& f_path, double cx, double cy,
               int maxk, const std::string& out, const std::string& csv) {
    auto u = grid::read_grid(u_path);
    auto f = grid::read_grid(f_path);
    blowup::PipelineParams pp;
    pp.maxk = maxk;
    auto rep = blowup::analyze_point(u, f, {cx, cy}, pp);
    spit(out, blowup::report_to_json(rep));
    if (!csv.empty()) {
        std::ostringstream os;
        os.precision(17);
        os << "r,phi\n";
        for (std::size_t i = 0; i < rep.lambda_radii.size(); ++i)
            os << rep.lambda_radii[i] << "," << rep.lambda_phi[i] << "\n";
        spit(csv, os.str());
    }
    const char* names[] = {"FrequencyK", "NonInteger", "KPlusOneEven", "Ascends", "Ambiguous"};
    std::cout << "class: " << names[static_cast<int>(rep.cls.cls)] << ", lambda_k "
              << rep.lambda_k << " in [" << rep.band_lo << ", " << rep.band_hi << "]\n";
    return 0;
}

int run_signorini(const std::string& lambda_str, int dim, const std::string& out) {
    if (dim != 2) throw ConfigInvalid("catalog enumeration is 2-D; use --dim 2");
    Rational lambda = parse_rational(lambda_str);
    auto cat = signorini::catalog_2d(lambda);
    ordered_json j = ordered_json::array();
    bool all_pass = true;
    for (const auto& c : cat) {
        auto rep = signorini::verify_signorini(c, 1e-8);
        all_pass = all_pass && rep.pass();
        ordered_json e;
        e["lambda"] = to_string(c.lambda);
        e["parity"] = c.parity == signorini::Parity::Even ? "even" : "odd";
        e["rep"] = c.rep == signorini::SignoriniCandidate::Rep::Analytic2D
                       ? "analytic"
                       : (c.rep == signorini::SignoriniCandidate::Rep::HalfPoly ? "half_poly"
                                                                                : "poly");
        e["poly"] = c.P.to_text();
        e["verify"] = {{"harmonic", rep.harmonic_off_L},
                       {"nonneg_on_L", rep.nonneg_on_L},
                       {"jump_nonpositive", rep.jump_nonpositive},
                       {"sampled", rep.sampled}};
        j.push_back(e);
    }
    std::string text = j.dump(2) + "\n";
    if (!out.empty()) spit(out, text);
    std::cout << "catalog(" << lambda_str << "): " << cat.size() << " generator(s)"
              << (cat.empty() ? " (inadmissible)" : "") << "\n";
    return all_pass ? 0 : 1;
}

int run_heleshaw(const std::string& config_path, const std::string& out,
                 const std::string& csv) {
    ordered_json j = ordered_json::parse(slurp(config_path));
    heleshaw::Geometry geo;
    std::string kind = j.value("geometry", std::string("pinch"));
    geo.kind = kind == "disk" ? heleshaw::Geometry::Kind::Disk
                              : heleshaw::Geometry::Kind::Pinch;
    geo.cells = j.value("cells", 256);
    geo.box_halfwidth = j.value("box_halfwidth", 2.0);
    geo.disk_radius = j.value("disk_radius", 0.2);
    geo.disk_radius2 = j.value("disk_radius2", geo.disk_radius);
    geo.separation = j.value("separation", 0.55);
    obstacle::SolverParams params;
    params.omega = j.value("omega", 1.97);
    std::vector<double> ts;
    if (j.value("refine", true)) {
        ts = heleshaw::refine_pinch_times(geo, j.value("t_min", 0.05), j.value("t_max", 0.4),
                                          j.value("bisections", 14), j.value("t_count", 24),
                                          j.value("ratio", 1.25), params);
    } else {
        double t0 = j.value("t_min", 0.05), t1 = j.value("t_max", 0.4);
        int n = j.value("t_count", 16);
        for (int i = 0; i < n; ++i) ts.push_back(t0 + (t1 - t0) * i / (n - 1));
    }
    auto fam = obstacle::solve_family(heleshaw::make_family_problem(geo, ts, params));
    auto st = heleshaw::detect_singular_times(fam);
    ordered_json report = ordered_json::parse(heleshaw::spacetime_to_json(st));
    int rc = 0;
    if (!st.records.empty() && j.value("audit_k", 2) > 0) {
        double cx = 0, cy = 0;
        for (const auto& r : st.records) {
            cx += r.x[0];
            cy += r.x[1];
        }
        cx /= static_cast<double>(st.records.size());
        cy /= static_cast<double>(st.records.size());
        auto audit =
            heleshaw::cleaning_audit(fam, {cx, cy}, ts.front(), j.value("audit_k", 2), 0.5);
        report["cleaning"] = {{"c0", audit.c0},
                              {"exponent", audit.exponent},
                              {"vacuous", audit.vacuous},
                              {"violations", audit.violations}};
        if (!audit.violations.empty()) rc = 1;
    }
    if (!st.graph_violations.empty()) rc = 1;
    spit(out, report.dump(2) + "\n");
    if (!csv.empty()) heleshaw::write_timeline_csv(st, csv);
    std::cout << "space-time records: " << st.records.size() << ", graph violations "
              << st.graph_violations.size() << "\n";
    return rc;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"obstacle-problem laboratory"};
    app.require_subcommand(1);

    auto* ans = app.add_subcommand("ansatz", "build a polynomial ansatz family");
    int dim = 2, order = 3, nu_axis = -1, nu_sign = 1;
    std::string p_files, p3_file, rhs_file, out = "family.json";
    ans->add_option("--dim", dim);
    ans->add_option("--order", order);
    ans->add_option("--nu-axis", nu_axis, "axis index of nu (default: last)");
    ans->add_option("--nu-sign", nu_sign);
    ans->add_option("--p", p_files, "comma-separated degree=polyfile entries");
    ans->add_option("--p3-file", p3_file, "polynomial file for p3");
    ans->add_option("--rhs-taylor-file", rhs_file);
    ans->add_option("--out", out);

    auto* sol = app.add_subcommand("solve", "solve a discrete obstacle problem");
    std::string sol_cfg, sol_out = "u.grid", sol_fout, sol_ccsv;
    sol->add_option("--config", sol_cfg)->required();
    sol->add_option("--out", sol_out);
    sol->add_option("--f-out", sol_fout);
    sol->add_option("--contact-csv", sol_ccsv);

    auto* frq = app.add_subcommand("freq", "frequency diagnostics profile");
    std::string frq_u, frq_fam, frq_out = "profile.csv", frq_svg;
    std::vector<double> frq_center{0, 0};
    double frq_gamma = 0, frq_wl = 2.0;
    frq->add_option("--u", frq_u)->required();
    frq->add_option("--family", frq_fam);
    frq->add_option("--center", frq_center)->expected(2);
    frq->add_option("--gamma", frq_gamma);
    frq->add_option("--weiss-lambda", frq_wl);
    frq->add_option("--out", frq_out);
    frq->add_option("--svg", frq_svg);

    auto* blw = app.add_subcommand("blowup", "blow-up pipeline at a point");
    std::string blw_u, blw_f, blw_out = "report.json", blw_csv;
    std::vector<double> blw_center{0, 0};
    int blw_maxk = 3;
    blw->add_option("--u", blw_u)->required();
    blw->add_option("--f", blw_f)->required();
    blw->add_option("--center", blw_center)->expected(2);
    blw->add_option("--maxk", blw_maxk);
    blw->add_option("--out", blw_out);
    blw->add_option("--csv", blw_csv);

    auto* sig = app.add_subcommand("signorini", "thin-obstacle solution catalog");
    auto* cat = sig->add_subcommand("catalog", "enumerate homogeneous solutions");
    std::string sig_lambda = "2";
    int sig_dim = 2;
    std::string sig_out;
    cat->add_option("--lambda", sig_lambda)->required();
    cat->add_option("--dim", sig_dim);
    cat->add_option("--out", sig_out);

    auto* hel = app.add_subcommand("heleshaw", "monotone-family driver");
    std::string hel_cfg, hel_out = "spacetime.json", hel_csv;
    hel->add_option("--config", hel_cfg)->required();
    hel->add_option("--out", hel_out);
    hel->add_option("--csv", hel_csv);

    auto* run = app.add_subcommand("run", "run a campaign config");
    std::string run_cfg, run_dir = "out";
    run->add_option("--config", run_cfg)->required();
    run->add_option("--out-dir", run_dir);

    auto* rep = app.add_subcommand("report", "summarize a campaign manifest");
    std::string rep_manifest;
    rep->add_option("--manifest", rep_manifest)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (ans->parsed()) {
            if (nu_axis < 0) nu_axis = dim - 1;
            if (!p3_file.empty()) p_files = p_files.empty() ? "3=" + p3_file : p_files + ",3=" + p3_file;
            return run_ansatz(dim, order, nu_axis, nu_sign, p_files, rhs_file, out);
        }
        if (sol->parsed()) return run_solve(sol_cfg, sol_out, sol_fout, sol_ccsv);
        if (frq->parsed())
            return run_freq(frq_u, frq_fam, frq_center[0], frq_center[1], frq_gamma, frq_wl,
                            frq_out, frq_svg);
        if (blw->parsed())
            return run_blowup(blw_u, blw_f, blw_center[0], blw_center[1], blw_maxk, blw_out,
                              blw_csv);
        if (sig->parsed()) return run_signorini(sig_lambda, sig_dim, sig_out);
        if (hel->parsed()) return run_heleshaw(hel_cfg, hel_out, hel_csv);
        if (run->parsed()) {
            auto cfg = campaign::parse_config(campaign::read_file(run_cfg));
            auto man = campaign::run(cfg, run_dir);
            std::cout << "manifest " << man.config_hash << " with " << man.files.size()
                      << " artifact(s) in " << run_dir << "\n";
            return 0;
        }
        if (rep->parsed()) {
            std::cout << campaign::report(rep_manifest);
            return 0;
        }
    } catch (const ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ManifestMissing& e) {
        std::cerr << "manifest error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const MonotonicityViolation& e) {
        std::cerr << "audit failure: " << e.what() << " at node " << e.worst_node << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
