#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ucp/geometry.hpp"

namespace ucp {

// Minimal INI reader: [section] headers, key = value entries, '#' or ';'
// comments, repeated keys and repeated sections preserved in order.
struct IniFile {
    struct Entry {
        std::string key, value;
        int line = 0;
    };
    struct Section {
        std::string name;
        std::vector<Entry> entries;
        int line = 0;

        const Entry* find(const std::string& key) const;
        std::vector<const Entry*> all(const std::string& key) const;
        bool has(const std::string& key) const { return find(key) != nullptr; }

        double get_double(const std::string& key) const;
        double get_double(const std::string& key, double fallback) const;
        long long get_int(const std::string& key) const;
        long long get_int(const std::string& key, long long fallback) const;
        bool get_bool(const std::string& key, bool fallback) const;
        std::string get_string(const std::string& key) const;
        std::string get_string(const std::string& key, const std::string& fallback) const;
        std::vector<double> get_doubles(const std::string& key) const;

        // throws config_error when a key outside `allowed` appears
        void validate_keys(const std::set<std::string>& allowed) const;
    };

    std::vector<Section> sections;

    static IniFile parse_string(const std::string& text, const std::string& origin = "<string>");
    static IniFile parse_file(const std::string& path);

    const Section* find(const std::string& name) const;
    const Section& require(const std::string& name) const;
    std::vector<const Section*> all_with_prefix(const std::string& prefix) const;
};

// [domain] + [obstacles] sections resolved into geometry values. `fatten`
// produces B as the rho-fattening of S; otherwise B == S.
struct GeometrySpec {
    ConvexDomain domain;
    BallUnion obstacles;   // S
    double fatten = 0.0;   // rho; B = S fattened by rho
    BallUnion fattened() const { return fatten > 0.0 ? obstacles.fattened(fatten) : obstacles; }
};

GeometrySpec load_geometry(const IniFile& ini, const std::string& base_dir = "");

} // namespace ucp
