#pragma once
// Run configuration: JSON documents validated against a per-command key
// schema (unknown keys are rejected), plus the deterministic config hash
// stamped into every report.

#include <fstream>
#include <set>

#include <json.hpp>

#include "ciflow/core.hpp"

namespace ciflow {

using Json = nlohmann::json;

// FNV-1a over the canonical (sorted-key) JSON serialization.
inline uint64_t config_hash(const Json& j) {
    std::string s = j.dump();  // nlohmann objects iterate in sorted key order
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string config_hash_hex(const Json& j) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(config_hash(j)));
    return buf;
}

// Shared keys accepted by every subcommand.
inline const std::set<std::string>& common_config_keys() {
    static const std::set<std::string> keys = {
        "threads", "out", "tol", "seed", "truncation", "grid_oversample", "max_grid",
    };
    return keys;
}

inline void validate_config(const Json& cfg, const std::set<std::string>& command_keys,
                            const std::string& command) {
    if (!cfg.is_object()) fail(Errc::config_error, "config must be a JSON object");
    std::string allowed;
    for (const auto& k : common_config_keys()) allowed += k + " ";
    for (const auto& k : command_keys) allowed += k + " ";
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        if (common_config_keys().count(it.key()) || command_keys.count(it.key())) continue;
        fail(Errc::config_error, "unknown config key '" + it.key() + "' for command '" + command +
                                     "'; allowed keys: " + allowed);
    }
}

inline Json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::io_error, "cannot open config: " + path);
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) fail(Errc::config_error, "malformed JSON in config: " + path);
    return j;
}

// Report stamp: library version + config hash, included in every CSV/JSON.
inline Json report_stamp(const Json& effective_config) {
    Json j;
    j["library"] = std::string(kLibraryName) + " " + kLibraryVersion;
    j["config_hash"] = config_hash_hex(effective_config);
    return j;
}

inline std::string csv_stamp(const Json& effective_config) {
    return std::string("# ") + kLibraryName + " " + kLibraryVersion +
           " config_hash=" + config_hash_hex(effective_config) + "\n";
}

}  // namespace ciflow
