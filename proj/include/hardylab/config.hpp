#pragma once

// Flat-section INI configuration: `[section]` headers group `key = value`
// lines; keys are unique across the file (later wins). Values stay strings
// until a caller asks for a typed view. Unknown keys produce warnings, not
// failures; malformed lines fail with their line number.

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace hardylab {

struct Config {
    std::map<std::string, std::string> values;
    std::vector<std::string> warnings;

    bool has(const std::string& key) const { return values.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback = "") const {
        auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }

    double get_number(const std::string& key, double fallback) const {
        auto it = values.find(key);
        if (it == values.end()) return fallback;
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size())
            throw std::runtime_error("config: key '" + key + "' is not a number: " + it->second);
        return v;
    }

    long long get_integer(const std::string& key, long long fallback) const {
        auto it = values.find(key);
        if (it == values.end()) return fallback;
        std::size_t pos = 0;
        const long long v = std::stoll(it->second, &pos);
        if (pos != it->second.size())
            throw std::runtime_error("config: key '" + key + "' is not an integer: " + it->second);
        return v;
    }

    bool get_flag(const std::string& key, bool fallback) const {
        auto it = values.find(key);
        if (it == values.end()) return fallback;
        const std::string& s = it->second;
        if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
        if (s == "false" || s == "no" || s == "off" || s == "0") return false;
        throw std::runtime_error("config: key '" + key + "' is not a boolean: " + s);
    }

    std::vector<std::string> get_list(const std::string& key) const {
        std::vector<std::string> out;
        auto it = values.find(key);
        if (it == values.end()) return out;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto b = item.find_first_not_of(" \t");
            if (b == std::string::npos) continue;
            const auto e = item.find_last_not_of(" \t");
            out.push_back(item.substr(b, e - b + 1));
        }
        return out;
    }
};

namespace detail {

inline std::string trimmed(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace detail

// known_keys drive the unknown-key warnings; pass an empty set to accept
// everything silently.
inline Config load_config(const std::string& path, const std::set<std::string>& known_keys = {}) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    Config cfg;
    std::string line;
    int line_no = 0;
    std::string section;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = detail::trimmed(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']' || t.size() < 3)
                throw std::runtime_error("config: malformed section header at line " +
                                         std::to_string(line_no));
            section = detail::trimmed(t.substr(1, t.size() - 2));
            if (section.empty())
                throw std::runtime_error("config: empty section name at line " + std::to_string(line_no));
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: expected 'key = value' at line " + std::to_string(line_no));
        const std::string key = detail::trimmed(t.substr(0, eq));
        const std::string value = detail::trimmed(t.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config: empty key at line " + std::to_string(line_no));
        if (!known_keys.empty() && known_keys.count(key) == 0)
            cfg.warnings.push_back("unknown config key '" + key + "' (line " + std::to_string(line_no) +
                                   (section.empty() ? std::string(")") : ", section [" + section + "])"));
        cfg.values[key] = value;
    }
    return cfg;
}

} // namespace hardylab
