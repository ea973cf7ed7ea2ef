#include "oblab/campaign.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "oblab/blowup.hpp"
#include "oblab/diagnostics.hpp"
#include "oblab/heleshaw.hpp"
#include "oblab/obstacle.hpp"

namespace oblab::campaign {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
}

namespace {

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

void check_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
    for (const auto& [key, val] : obj.items()) {
        if (!allowed.count(key))
            throw ConfigInvalid("unknown key '" + key + "' in " + where);
        (void)val;
    }
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write " + path);
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ansatz::AnsatzInput family_input_from(const ordered_json& jf) {
    check_keys(jf, {"dim", "order", "nu", "p", "rhs"}, "family");
    ansatz::AnsatzInput in;
    in.dim = jf.at("dim").get<int>();
    in.order = jf.at("order").get<int>();
    if (in.dim < 2 || in.dim > 3) throw ConfigInvalid("family.dim must be 2 or 3");
    if (in.order < 2 || in.order > 10) throw ConfigInvalid("family.order must be in [2,10]");
    check_keys(jf.at("nu"), {"axis", "sign"}, "family.nu");
    in.nu.axis = jf.at("nu").at("axis").get<int>();
    in.nu.sign = jf.at("nu").at("sign").get<int>();
    in.p.resize(static_cast<std::size_t>(in.order) + 1, poly::HomoPoly(in.dim, 0));
    for (int j = 3; j <= in.order; ++j) in.p[static_cast<std::size_t>(j)] = poly::HomoPoly(in.dim, j);
    if (jf.contains("p")) {
        for (const auto& [key, val] : jf.at("p").items()) {
            int d = std::stoi(key);
            if (d < 3 || d > in.order) throw ConfigInvalid("family.p has a degree out of range");
            in.p[static_cast<std::size_t>(d)] =
                poly::parse_homopoly_text(val.get<std::string>(), in.dim, d);
        }
    }
    if (jf.contains("rhs") && jf.at("rhs").is_string() && jf.at("rhs").get<std::string>() != "unit") {
        ansatz::TaylorData td;
        td.f_taylor = poly::parse_poly_text(jf.at("rhs").get<std::string>(), in.dim);
        in.rhs = td;
    }
    return in;
}

}  // namespace

CampaignConfig parse_config(const std::string& json_text) {
    ordered_json j;
    try {
        j = ordered_json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigInvalid(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, {"schema", "name", "family", "grid", "solver", "freq", "blowup", "heleshaw",
                   "modules", "plots"},
               "config");
    if (!j.contains("schema") || j.at("schema").get<int>() != 1)
        throw ConfigInvalid("config.schema must be 1");
    CampaignConfig cfg;
    cfg.name = j.value("name", std::string("campaign"));
    cfg.plots = j.value("plots", false);
    if (j.contains("modules"))
        for (const auto& m : j.at("modules")) cfg.modules.push_back(m.get<std::string>());
    static const std::set<std::string> known_modules{"ansatz", "solve", "freq", "blowup",
                                                     "heleshaw"};
    for (const auto& m : cfg.modules)
        if (!known_modules.count(m)) throw ConfigInvalid("unknown module toggle '" + m + "'");
    cfg.has_family = j.contains("family");
    if (cfg.has_family) (void)family_input_from(j.at("family"));  // validate now
    if (j.contains("grid")) {
        check_keys(j.at("grid"), {"cells", "halfwidth"}, "grid");
        int cells = j.at("grid").at("cells").get<int>();
        double hw = j.at("grid").at("halfwidth").get<double>();
        if (cells < 8 || cells > 4096) throw ConfigInvalid("grid.cells out of range");
        if (!(hw > 0)) throw ConfigInvalid("grid.halfwidth must be positive");
    }
    if (j.contains("solver")) {
        check_keys(j.at("solver"), {"omega", "tol", "max_sweeps"}, "solver");
        double omega = j.at("solver").value("omega", 1.8);
        double tol = j.at("solver").value("tol", 1e-10);
        if (!(omega > 0.0 && omega < 2.0)) throw ConfigInvalid("solver.omega must be in (0,2)");
        if (!(tol > 0.0)) throw ConfigInvalid("solver.tol must be positive");
    }
    if (j.contains("freq")) {
        check_keys(j.at("freq"), {"gamma", "weiss_lambda", "eps", "rmin_cells", "rmax"}, "freq");
        if (!(j.at("freq").value("gamma", 1.0) > 0)) throw ConfigInvalid("freq.gamma must be positive");
    }
    if (j.contains("blowup")) check_keys(j.at("blowup"), {"maxk", "center"}, "blowup");
    if (j.contains("heleshaw")) {
        check_keys(j.at("heleshaw"),
                   {"geometry", "cells", "box_halfwidth", "disk_radius", "separation", "t_min",
                    "t_max", "t_count", "audit_k", "refine", "bisections", "ratio", "omega"},
                   "heleshaw");
    }
    cfg.canonical = j.dump(2) + "\n";
    cfg.raw_json = json_text;
    return cfg;
}

Manifest run(const CampaignConfig& cfg, const std::string& out_dir) {
    ordered_json j = ordered_json::parse(cfg.canonical);
    fs::create_directories(out_dir);
    Manifest man;
    man.config_hash = "fnv64:" + hex64(fnv1a64(cfg.canonical));
    std::vector<std::string> files;

    auto emit = [&](const std::string& rel, const std::string& bytes) {
        write_file(out_dir + "/" + rel, bytes);
        files.push_back(rel);
    };
    auto has_module = [&](const std::string& m) {
        return std::find(cfg.modules.begin(), cfg.modules.end(), m) != cfg.modules.end();
    };

    std::optional<ansatz::AnsatzFamily> family;
    if (cfg.has_family && (has_module("ansatz") || has_module("solve") || has_module("freq") ||
                           has_module("blowup"))) {
        family = ansatz::build(family_input_from(j.at("family")));
        if (has_module("ansatz")) emit("family.json", ansatz::family_to_json(*family));
    }

    std::optional<obstacle::Manufactured> manu;
    if (family && has_module("solve")) {
        int cells = j.at("grid").at("cells").get<int>();
        double hw = j.at("grid").at("halfwidth").get<double>();
        obstacle::SolverParams params;
        if (j.contains("solver")) {
            params.omega = j.at("solver").value("omega", 1.8);
            params.tol = j.at("solver").value("tol", 1e-10);
            params.max_sweeps = j.at("solver").value("max_sweeps", 400000l);
        }
        manu = obstacle::manufacture_from_ansatz(*family, hw, cells, params);
        grid::GridField u = obstacle::solve(manu->prob);
        grid::write_grid(u, out_dir + "/u.grid");
        files.push_back("u.grid");
        grid::write_grid(manu->prob.f, out_dir + "/f.grid");
        files.push_back("f.grid");
        manu->exact = u;  // downstream modules consume the solved field
    }

    if (manu && has_module("freq")) {
        double gamma = j.contains("freq") ? j.at("freq").value("gamma", family->order() + 1.5)
                                          : family->order() + 1.5;
        double wl = j.contains("freq") ? j.at("freq").value("weiss_lambda", 2.0) : 2.0;
        double eps = j.contains("freq") ? j.at("freq").value("eps", 0.5) : 0.5;
        double rmin_cells = j.contains("freq") ? j.at("freq").value("rmin_cells", 8.0) : 8.0;
        double rmax = j.contains("freq") ? j.at("freq").value("rmax", 0.0) : 0.0;
        grid::Point x0(static_cast<std::size_t>(manu->exact.dim), 0.0);
        grid::GridField v =
            diag::subtract_poly(manu->exact, poly::RealPoly(family->p_ansatz), x0);
        auto radii = diag::geometric_radii(v, x0, rmin_cells * v.h, rmax);
        auto prof = diag::compute_profile(v, x0, gamma, wl, radii);
        auto mon = diag::monneau(manu->exact, *family, x0, radii, eps);
        prof.M = mon.M;
        prof.monneau_k = family->order();
        {
            std::ostringstream tmp;
            diag::write_profile_csv(prof, out_dir + "/profile.csv");
            files.push_back("profile.csv");
        }
        auto fit = diag::audit_monotonicity(prof.phi, prof.r, eps);
        ordered_json audits;
        audits["drift_eps"] = eps;
        audits["phi_drift_C"] = fit.c_fit;
        ordered_json viol = ordered_json::array();
        for (std::size_t i = 0; i + 1 < prof.r.size(); ++i)
            if (fit.post_violations[i] > 1e-6)
                viol.push_back({{"r", prof.r[i + 1]}, {"magnitude", fit.post_violations[i]}});
        audits["phi_residual_violations"] = viol;
        audits["monneau_drift_C"] = mon.c_fit;
        audits["pass"] = viol.empty();
        emit("audits.json", audits.dump(2) + "\n");
        if (cfg.plots) {
            std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
            series["H"] = {prof.r, prof.H};
            series["D"] = {prof.r, prof.D};
            diag::write_loglog_svg(out_dir + "/profile.svg", cfg.name, series);
            files.push_back("profile.svg");
        }
    }

    if (manu && has_module("blowup")) {
        blowup::PipelineParams pp;
        grid::Point x0(static_cast<std::size_t>(manu->exact.dim), 0.0);
        if (j.contains("blowup")) {
            pp.maxk = j.at("blowup").value("maxk", 3);
            if (j.at("blowup").contains("center")) {
                auto c = j.at("blowup").at("center");
                for (std::size_t a = 0; a < x0.size(); ++a) x0[a] = c[a].get<double>();
            }
        }
        auto rep = blowup::analyze_point(manu->exact, manu->prob.f, x0, pp);
        emit("report.json", blowup::report_to_json(rep));
    }

    if (has_module("heleshaw") && j.contains("heleshaw")) {
        const auto& hj = j.at("heleshaw");
        heleshaw::Geometry geo;
        std::string kind = hj.value("geometry", std::string("pinch"));
        geo.kind = kind == "disk" ? heleshaw::Geometry::Kind::Disk
                                  : heleshaw::Geometry::Kind::Pinch;
        geo.cells = hj.value("cells", 256);
        geo.box_halfwidth = hj.value("box_halfwidth", 2.0);
        geo.disk_radius = hj.value("disk_radius", 0.2);
        geo.separation = hj.value("separation", 0.55);
        obstacle::SolverParams hparams;
        hparams.omega = hj.value("omega", 1.97);
        std::vector<double> ts;
        if (hj.value("refine", true)) {
            ts = heleshaw::refine_pinch_times(geo, hj.value("t_min", 0.05),
                                              hj.value("t_max", 0.4),
                                              hj.value("bisections", 14),
                                              hj.value("t_count", 24),
                                              hj.value("ratio", 1.25), hparams);
        } else {
            double t0 = hj.value("t_min", 0.05), t1 = hj.value("t_max", 0.15);
            int tn = hj.value("t_count", 16);
            for (int i = 0; i < tn; ++i) ts.push_back(t0 + (t1 - t0) * i / (tn - 1));
        }
        auto spec = heleshaw::make_family_problem(geo, ts, hparams);
        auto fam = obstacle::solve_family(spec);
        auto st = heleshaw::detect_singular_times(fam);
        ordered_json sj = ordered_json::parse(heleshaw::spacetime_to_json(st));
        int audit_k = hj.value("audit_k", 2);
        if (!st.records.empty() && audit_k > 0) {
            double cx2 = 0, cy2 = 0;
            for (const auto& r : st.records) {
                cx2 += r.x[0];
                cy2 += r.x[1];
            }
            cx2 /= static_cast<double>(st.records.size());
            cy2 /= static_cast<double>(st.records.size());
            auto audit = heleshaw::cleaning_audit(fam, {cx2, cy2}, ts.front(), audit_k, 0.5);
            sj["cleaning"] = {{"c0", audit.c0},
                              {"exponent", audit.exponent},
                              {"vacuous", audit.vacuous},
                              {"violations", audit.violations}};
        }
        emit("spacetime.json", sj.dump(2) + "\n");
        heleshaw::write_timeline_csv(st, out_dir + "/timeline.csv");
        files.push_back("timeline.csv");
    }

    ordered_json jm;
    jm["config_hash"] = man.config_hash;
    jm["config"] = ordered_json::parse(cfg.canonical);
    std::sort(files.begin(), files.end());
    ordered_json jf = ordered_json::array();
    for (const auto& rel : files) {
        std::string bytes = read_file(out_dir + "/" + rel);
        ManifestEntry e;
        e.path = rel;
        e.bytes = bytes.size();
        e.fnv64 = hex64(fnv1a64(bytes));
        man.files.push_back(e);
        jf.push_back({{"path", e.path}, {"bytes", e.bytes}, {"fnv64", e.fnv64}});
    }
    jm["files"] = jf;
    write_file(out_dir + "/manifest.json", jm.dump(2) + "\n");
    return man;
}

std::string report(const std::string& manifest_path) {
    if (!fs::exists(manifest_path)) throw ManifestMissing("no manifest at " + manifest_path);
    ordered_json jm = ordered_json::parse(read_file(manifest_path));
    std::string dir = fs::path(manifest_path).parent_path().string();
    if (dir.empty()) dir = ".";
    std::ostringstream os;
    os << "campaign " << jm.at("config").value("name", std::string("?")) << "  ["
       << jm.at("config_hash").get<std::string>() << "]\n";
    const auto& files = jm.at("files");
    if (files.empty()) {
        os << "no runs\n";
        return os.str();
    }
    os << "artifacts: " << files.size() << "\n";
    for (const auto& f : files) os << "  " << f.at("path").get<std::string>() << "  ("
                                   << f.at("bytes").get<std::uint64_t>() << " bytes)\n";
    auto have = [&](const std::string& name) {
        for (const auto& f : files)
            if (f.at("path").get<std::string>() == name) return true;
        return false;
    };
    if (have("report.json")) {
        ordered_json r = ordered_json::parse(read_file(dir + "/report.json"));
        os << "blow-up point " << r.at("x0").dump() << ": stratum dim " << r.at("stratum_dim")
           << ", k=" << r.at("k_final") << ", lambda_k=" << r.at("lambda_k").get<double>()
           << " band " << r.at("band").dump() << "\n";
        os << "class: " << r.at("class").get<std::string>() << "\n";
        if (r.value("anomalous", false)) os << "anomalous: even-k frequency pin (solver artifact?)\n";
    }
    if (have("audits.json")) {
        ordered_json a = ordered_json::parse(read_file(dir + "/audits.json"));
        os << "phi drift fit: C=" << a.at("phi_drift_C").get<double>()
           << " (eps=" << a.at("drift_eps").get<double>() << "), monneau C="
           << a.at("monneau_drift_C").get<double>() << "\n";
        const auto& v = a.at("phi_residual_violations");
        if (v.empty()) {
            os << "audit: pass (no residual violations)\n";
        } else {
            os << "audit: FAIL, violating radii:";
            for (const auto& e : v) os << " " << e.at("r").get<double>();
            os << "\n";
        }
    }
    if (have("spacetime.json")) {
        ordered_json s = ordered_json::parse(read_file(dir + "/spacetime.json"));
        os << "space-time singular records: " << s.at("records").size()
           << ", graph violations: " << s.at("graph_violations").size() << "\n";
    }
    return os.str();
}

}  // namespace oblab::campaign
