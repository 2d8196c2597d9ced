#include "ucp/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "ucp/errors.hpp"
#include "ucp/io.hpp"

namespace ucp {

namespace {
std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}
} // namespace

const IniFile::Entry* IniFile::Section::find(const std::string& key) const {
    for (const auto& e : entries)
        if (e.key == key) return &e;
    return nullptr;
}

std::vector<const IniFile::Entry*> IniFile::Section::all(const std::string& key) const {
    std::vector<const Entry*> out;
    for (const auto& e : entries)
        if (e.key == key) out.push_back(&e);
    return out;
}

double IniFile::Section::get_double(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) throw config_error("[" + name + "] missing key '" + key + "'");
    try {
        std::size_t pos = 0;
        const double v = std::stod(e->value, &pos);
        if (trim(e->value.substr(pos)).empty()) return v;
    } catch (...) {
    }
    throw config_error("line " + std::to_string(e->line) + ": '" + key + "' is not a number");
}

double IniFile::Section::get_double(const std::string& key, double fallback) const {
    return find(key) ? get_double(key) : fallback;
}

long long IniFile::Section::get_int(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) throw config_error("[" + name + "] missing key '" + key + "'");
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(e->value, &pos);
        if (trim(e->value.substr(pos)).empty()) return v;
    } catch (...) {
    }
    throw config_error("line " + std::to_string(e->line) + ": '" + key + "' is not an integer");
}

long long IniFile::Section::get_int(const std::string& key, long long fallback) const {
    return find(key) ? get_int(key) : fallback;
}

bool IniFile::Section::get_bool(const std::string& key, bool fallback) const {
    const Entry* e = find(key);
    if (!e) return fallback;
    std::string v = e->value;
    std::transform(v.begin(), v.end(), v.begin(), ::tolower);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw config_error("line " + std::to_string(e->line) + ": '" + key + "' is not a boolean");
}

std::string IniFile::Section::get_string(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) throw config_error("[" + name + "] missing key '" + key + "'");
    return e->value;
}

std::string IniFile::Section::get_string(const std::string& key, const std::string& fallback) const {
    const Entry* e = find(key);
    return e ? e->value : fallback;
}

std::vector<double> IniFile::Section::get_doubles(const std::string& key) const {
    const Entry* e = find(key);
    if (!e) throw config_error("[" + name + "] missing key '" + key + "'");
    std::istringstream ss(e->value);
    std::vector<double> out;
    double v;
    while (ss >> v) out.push_back(v);
    std::string rest;
    ss.clear();
    ss >> rest;
    if (!trim(rest).empty())
        throw config_error("line " + std::to_string(e->line) + ": '" + key + "' is not a number list");
    return out;
}

void IniFile::Section::validate_keys(const std::set<std::string>& allowed) const {
    for (const auto& e : entries)
        if (!allowed.count(e.key))
            throw config_error("line " + std::to_string(e.line) + ": unknown key '" + e.key +
                               "' in [" + name + "]");
}

IniFile IniFile::parse_string(const std::string& text, const std::string& origin) {
    IniFile ini;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    Section* cur = nullptr;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error(origin + ":" + std::to_string(lineno) + ": malformed section header");
            Section s;
            s.name = trim(line.substr(1, line.size() - 2));
            s.line = lineno;
            ini.sections.push_back(std::move(s));
            cur = &ini.sections.back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(origin + ":" + std::to_string(lineno) + ": expected key = value");
        if (!cur)
            throw config_error(origin + ":" + std::to_string(lineno) + ": entry outside any section");
        Entry e;
        e.key = trim(line.substr(0, eq));
        e.value = trim(line.substr(eq + 1));
        e.line = lineno;
        if (e.key.empty())
            throw config_error(origin + ":" + std::to_string(lineno) + ": empty key");
        cur->entries.push_back(std::move(e));
    }
    return ini;
}

IniFile IniFile::parse_file(const std::string& path) {
    return parse_string(io::read_text_file(path), path);
}

const IniFile::Section* IniFile::find(const std::string& name) const {
    for (const auto& s : sections)
        if (s.name == name) return &s;
    return nullptr;
}

const IniFile::Section& IniFile::require(const std::string& name) const {
    const Section* s = find(name);
    if (!s) throw config_error("missing section [" + name + "]");
    return *s;
}

std::vector<const IniFile::Section*> IniFile::all_with_prefix(const std::string& prefix) const {
    std::vector<const Section*> out;
    for (const auto& s : sections)
        if (s.name.rfind(prefix, 0) == 0) out.push_back(&s);
    return out;
}

namespace {
Point parse_point(const IniFile::Section& s, const std::string& key) {
    return s.get_doubles(key);
}
} // namespace

GeometrySpec load_geometry(const IniFile& ini, const std::string& base_dir) {
    const auto& dom = ini.require("domain");
    dom.validate_keys({"kind", "dim", "lo", "hi", "center", "radius", "half_width", "plane",
                       "interior", "clip"});
    const std::string kind = dom.get_string("kind");

    GeometrySpec spec{ConvexDomain::box({0, 0, 0}, {1, 1, 1}), BallUnion(3), 0.0};
    if (kind == "box") {
        spec.domain = ConvexDomain::box(parse_point(dom, "lo"), parse_point(dom, "hi"));
    } else if (kind == "ball") {
        spec.domain = ConvexDomain::ball(parse_point(dom, "center"), dom.get_double("radius"));
    } else if (kind == "whole_space") {
        if (dom.has("half_width")) {
            const int d = static_cast<int>(dom.get_int("dim", 3));
            const double w = dom.get_double("half_width");
            spec.domain = ConvexDomain::whole_space(Point(static_cast<std::size_t>(d), -w),
                                                    Point(static_cast<std::size_t>(d), w));
        } else {
            spec.domain = ConvexDomain::whole_space(parse_point(dom, "lo"), parse_point(dom, "hi"));
        }
    } else if (kind == "halfspaces") {
        std::vector<Halfspace> planes;
        for (const auto* e : dom.all("plane")) {
            std::istringstream ss(e->value);
            std::vector<double> v;
            double x;
            while (ss >> x) v.push_back(x);
            if (v.size() < 2)
                throw config_error("line " + std::to_string(e->line) + ": plane needs d normals + offset");
            Halfspace h;
            h.offset = v.back();
            v.pop_back();
            h.normal = v;
            planes.push_back(std::move(h));
        }
        spec.domain = ConvexDomain::halfspaces(std::move(planes), parse_point(dom, "interior"));
    } else {
        throw config_error("[domain] unknown kind '" + kind + "'");
    }
    for (const auto* e : dom.all("clip")) {
        std::istringstream ss(e->value);
        std::vector<double> v;
        double x;
        while (ss >> x) v.push_back(x);
        if (v.size() != static_cast<std::size_t>(spec.domain.dim()) + 1)
            throw config_error("line " + std::to_string(e->line) + ": clip needs d normals + offset");
        Halfspace h;
        h.offset = v.back();
        v.pop_back();
        h.normal = v;
        spec.domain.add_clip(std::move(h));
    }

    spec.obstacles = BallUnion(spec.domain.dim());
    if (const auto* obs = ini.find("obstacles")) {
        obs->validate_keys({"ball", "csv", "fatten"});
        for (const auto* e : obs->all("ball")) {
            std::istringstream ss(e->value);
            std::vector<double> v;
            double x;
            while (ss >> x) v.push_back(x);
            if (v.size() != static_cast<std::size_t>(spec.domain.dim()) + 1)
                throw config_error("line " + std::to_string(e->line) + ": ball needs d coords + radius");
            const double r = v.back();
            v.pop_back();
            spec.obstacles.add(std::move(v), r);
        }
        if (obs->has("csv")) {
            std::string path = obs->get_string("csv");
            if (!base_dir.empty() && !path.empty() && path.front() != '/')
                path = base_dir + "/" + path;
            const BallUnion fromCsv = io::read_ball_csv(path, spec.domain.dim());
            for (std::size_t i = 0; i < fromCsv.size(); ++i)
                spec.obstacles.add(fromCsv.centers[i], fromCsv.radii[i]);
        }
        spec.fatten = obs->get_double("fatten", 0.0);
    }
    return spec;
}

} // namespace ucp
