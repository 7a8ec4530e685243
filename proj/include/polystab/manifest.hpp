#pragma once
// Reproducibility plumbing for batch experiments. A manifest records what was
// run — command, full parameter set, engine version, depth budget, generator
// seed — so a rerun regenerates byte-identical result records. The timestamp
// rides along for provenance but is deliberately excluded from the
// determinism contract (and from the CSV header, so census files diff clean).

#include "polystab/common.hpp"

#include <json.hpp>

#include <ctime>
#include <string>
#include <utility>
#include <vector>

namespace polystab {

inline constexpr const char* kEngineVersion = "1.0.0";

struct ExperimentManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> params;  // insertion order kept
    std::string engine_version = kEngineVersion;
    u32 depth_budget = 0;
    u64 seed = 0;
    std::string timestamp = now_utc();

    void set(std::string key, std::string value) {
        params.emplace_back(std::move(key), std::move(value));
    }
    void set(std::string key, u64 value) { set(std::move(key), std::to_string(value)); }

    static std::string now_utc() {
        std::time_t t = std::time(nullptr);
        std::tm tm{};
        gmtime_r(&t, &tm);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
        return buf;
    }

    // "# key=value" comment rows prefixed to CSV streams; deterministic
    std::string csv_comment_rows() const {
        std::string s;
        s += "# command=" + command + "\n";
        s += "# engine_version=" + engine_version + "\n";
        s += "# depth_budget=" + std::to_string(depth_budget) + "\n";
        s += "# seed=" + std::to_string(seed) + "\n";
        for (const auto& [k, v] : params) s += "# " + k + "=" + v + "\n";
        return s;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["command"] = command;
        j["engine_version"] = engine_version;
        j["depth_budget"] = depth_budget;
        j["seed"] = seed;
        nlohmann::json p = nlohmann::json::object();
        for (const auto& [k, v] : params) p[k] = v;
        j["params"] = p;
        j["timestamp"] = timestamp;  // informational; strip before diffing
        return j;
    }
};

}  // namespace polystab
