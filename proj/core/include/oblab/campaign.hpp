#pragma once

#include <string>
#include <vector>

#include "oblab/ansatz.hpp"

namespace oblab::campaign {

/// Validated campaign configuration. Parsing rejects unknown keys and bad
/// parameter ranges; `canonical` is the normalized serialization whose bytes
/// define the config hash.
struct CampaignConfig {
    std::string name;
    std::string canonical;
    std::string raw_json;
    bool has_family = false;
    bool plots = false;
    std::vector<std::string> modules;
    // parsed payloads are kept as JSON text and re-parsed by run(); the
    // canonical form is the contract.
};

CampaignConfig parse_config(const std::string& json_text);

struct ManifestEntry {
    std::string path;  // relative to the output directory
    std::uint64_t bytes = 0;
    std::string fnv64;
};

struct Manifest {
    std::string config_hash;
    std::vector<ManifestEntry> files;
};

// Runs the toggled modules, writes artifacts under out_dir, returns the
// manifest (also written as manifest.json). Identical configs produce
// byte-identical artifact sets.
Manifest run(const CampaignConfig& cfg, const std::string& out_dir);

// Human-readable one-page summary from a manifest on disk.
std::string report(const std::string& manifest_path);

std::uint64_t fnv1a64(const std::string& bytes);
std::string read_file(const std::string& path);

}  // namespace oblab::campaign
