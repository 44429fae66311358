#pragma once

#include "roms/common.hpp"
#include "roms/indices.hpp"
#include "roms/version.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace roms {

// Flat key=value experiment configuration. The key registry is closed:
// unknown keys are rejected at parse time, and every run echoes the full
// effective map so an output directory is self-describing.

struct ConfigKey {
    std::string_view name;
    std::string_view fallback;
};

inline const std::vector<ConfigKey>& config_registry() {
    static const std::vector<ConfigKey> keys = {
        {"regimes", "b1,b3,b5"},      // comma list of regime labels to simulate
        {"ingest", ""},               // comma list of label:path pairs; overrides simulation
        {"energy", "0.999"},          // POD energy threshold per regime
        {"grid_n", "1024"},
        {"x_min", "-20"},
        {"x_max", "20"},
        {"t_final", "40"},
        {"snapshots", "201"},
        {"profile", "sech"},
        {"amplitude", "1"},
        {"ic_mode", "4"},
        {"transient_fraction", "0.25"},  // leading snapshots dropped before training
        {"holdout", "10"},               // held-out validation snapshots per regime
        {"rtol", "1e-8"},
        {"atol", "1e-10"},
        {"window_lo", "513"},
        {"window_hi", "545"},
        {"subset_size", "3"},
        {"ga_population", "100"},
        {"ga_elite", "10"},
        {"ga_generations", "10"},
        {"ga_mutation", "0.5"},
        {"ga_radius", "3"},
        {"noise_frac", "0.005"},
        {"noise_rounds", "400"},
        {"accuracy_min", "0.95"},
        {"margin_min", "0.01"},  // classification wins below this residual gap do not count
        {"seed", "7"},
        {"out_dir", "run"},
    };
    return keys;
}

struct ExperimentConfig {
    std::map<std::string, std::string> values;

    const std::string& get(const std::string& key) const {
        auto it = values.find(key);
        if (it == values.end())
            throw ConfigError("config: unknown key '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key) const {
        const std::string& raw = get(key);
        double v = 0;
        auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
        if (ec != std::errc() || p != raw.data() + raw.size())
            throw ConfigError("config: key '" + key + "' is not a number: '" + raw + "'");
        return v;
    }

    long get_int(const std::string& key) const {
        const std::string& raw = get(key);
        long v = 0;
        auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
        if (ec != std::errc() || p != raw.data() + raw.size())
            throw ConfigError("config: key '" + key + "' is not an integer: '" + raw + "'");
        return v;
    }

    std::uint64_t get_seed() const {
        const std::string& raw = get("seed");
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
        if (ec != std::errc() || p != raw.data() + raw.size())
            throw ConfigError("config: key 'seed' is not an unsigned integer: '" + raw + "'");
        return v;
    }

    IndexWindow window() const {
        return IndexWindow{static_cast<int>(get_int("window_lo")),
                           static_cast<int>(get_int("window_hi"))};
    }

    std::vector<std::string> list(const std::string& key) const {
        std::vector<std::string> out;
        std::istringstream ss(get(key));
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) out.push_back(tok);
        return out;
    }
};

inline ExperimentConfig default_config() {
    ExperimentConfig cfg;
    for (const ConfigKey& k : config_registry())
        cfg.values.emplace(std::string(k.name), std::string(k.fallback));
    return cfg;
}

inline void set_config_value(ExperimentConfig& cfg, const std::string& key,
                             const std::string& value) {
    auto it = cfg.values.find(key);
    if (it == cfg.values.end())
        throw ConfigError("config: unknown key '" + key + "'");
    it->second = value;
}

// One `key=value` assignment, as found in config files and --set flags.
inline void apply_config_line(ExperimentConfig& cfg, const std::string& line,
                              const std::string& where) {
    std::size_t eq = line.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ConfigError(where + ": expected key=value, got '" + line + "'");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    auto strip = [](std::string& s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
            s.pop_back();
    };
    strip(key);
    strip(value);
    set_config_value(cfg, key, value);
}

inline void load_config_file(ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config: " + path);
    std::string line;
    Index lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv(line);
        while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
        if (sv.empty() || sv.front() == '#') continue;
        apply_config_line(cfg, std::string(sv), path + ":" + std::to_string(lineno));
    }
}

// Canonical echo: registry order, one key=value per line. This exact text is
// what gets written into run directories and hashed into CSV headers.
inline std::string config_text(const ExperimentConfig& cfg) {
    std::string out;
    for (const ConfigKey& k : config_registry()) {
        out += std::string(k.name);
        out += '=';
        out += cfg.values.at(std::string(k.name));
        out += '\n';
    }
    return out;
}

inline std::string config_digest(const ExperimentConfig& cfg) {
    return fnv1a64_hex(config_text(cfg));
}

inline std::string provenance_header(const ExperimentConfig& cfg) {
    return "# roms " + std::string(version) + " config=" + config_digest(cfg);
}

}  // namespace roms
