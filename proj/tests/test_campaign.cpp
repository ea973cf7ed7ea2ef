#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oblab/campaign.hpp"
#include "oblab/errors.hpp"

using namespace oblab;
namespace fs = std::filesystem;

namespace {

const char* kMiniConfig = R"({
  "schema": 1,
  "name": "mini",
  "family": {
    "dim": 2, "order": 3, "nu": {"axis": 1, "sign": 1},
    "p": {"3": "1/8 : 0 3\n-3/8 : 2 1"},
    "rhs": "unit"
  },
  "grid": {"cells": 96, "halfwidth": 0.4},
  "solver": {"omega": 1.93, "tol": 1e-10, "max_sweeps": 100000},
  "freq": {"gamma": 4.5, "weiss_lambda": 3.0, "eps": 0.5, "rmin_cells": 8},
  "blowup": {"maxk": 2, "center": [0, 0]},
  "modules": ["ansatz", "solve", "freq"],
  "plots": false
})";

std::string tmpdir(const std::string& tag) {
    auto d = fs::temp_directory_path() / ("oblab_campaign_" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d.string();
}

}  // namespace

TEST_CASE("config validation") {
    CHECK_THROWS_AS(campaign::parse_config("{"), ConfigInvalid);
    CHECK_THROWS_AS(campaign::parse_config(R"({"schema": 2})"), ConfigInvalid);
    CHECK_THROWS_AS(campaign::parse_config(R"({"schema": 1, "bogus": 1})"), ConfigInvalid);
    CHECK_THROWS_AS(campaign::parse_config(
                        R"({"schema": 1, "grid": {"cells": 64, "halfwidth": -1}})"),
                    ConfigInvalid);
    CHECK_THROWS_AS(campaign::parse_config(
                        R"({"schema": 1, "grid": {"cells": 64, "hw": 1}})"),
                    ConfigInvalid);
    CHECK_THROWS_AS(campaign::parse_config(
                        R"({"schema": 1, "solver": {"omega": 2.5}})"),
                    ConfigInvalid);
    CHECK_THROWS_AS(campaign::parse_config(
                        R"({"schema": 1, "modules": ["nope"]})"),
                    ConfigInvalid);
    // canonicalization is idempotent (lossless round trip)
    auto cfg = campaign::parse_config(kMiniConfig);
    auto cfg2 = campaign::parse_config(cfg.canonical);
    CHECK(cfg.canonical == cfg2.canonical);
}

TEST_CASE("empty module set yields a config-echo manifest") {
    auto cfg = campaign::parse_config(R"({"schema": 1, "name": "noop", "modules": []})");
    auto dir = tmpdir("noop");
    auto man = campaign::run(cfg, dir);
    CHECK(man.files.empty());
    CHECK(fs::exists(dir + "/manifest.json"));
    auto text = campaign::report(dir + "/manifest.json");
    CHECK(text.find("no runs") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("deterministic artifacts across repeated runs") {
    auto cfg = campaign::parse_config(kMiniConfig);
    auto d1 = tmpdir("det1"), d2 = tmpdir("det2");
    auto m1 = campaign::run(cfg, d1);
    auto m2 = campaign::run(cfg, d2);
    REQUIRE(m1.files.size() == m2.files.size());
    CHECK(m1.config_hash == m2.config_hash);
    for (std::size_t i = 0; i < m1.files.size(); ++i) {
        CHECK(m1.files[i].path == m2.files[i].path);
        CHECK(m1.files[i].fnv64 == m2.files[i].fnv64);
        CHECK(campaign::read_file(d1 + "/" + m1.files[i].path) ==
              campaign::read_file(d2 + "/" + m2.files[i].path));
    }
    CHECK(campaign::read_file(d1 + "/manifest.json") ==
          campaign::read_file(d2 + "/manifest.json"));
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("report summarizes artifacts and audits") {
    auto cfg = campaign::parse_config(kMiniConfig);
    auto dir = tmpdir("report");
    campaign::run(cfg, dir);
    auto text = campaign::report(dir + "/manifest.json");
    CHECK(text.find("profile.csv") != std::string::npos);
    CHECK(text.find("drift fit") != std::string::npos);
    CHECK_THROWS_AS(campaign::report(dir + "/nothere.json"), ManifestMissing);
    fs::remove_all(dir);
}
