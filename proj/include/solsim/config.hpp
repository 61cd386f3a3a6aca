#pragma once
/*
Flat key-value experiment configs.

One dotted key per line, `key = value`, '#' comments. Values may be comma
lists; sweep expansion crosses every listed key. Unknown keys are rejected
after the consumer finishes reading, so a typo fails instead of silently
using a default.
*/
#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"

namespace solsim {

class Config {
public:
    Config() = default;

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw config_error("cannot open config file: " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse_string(ss.str());
    }

    static Config parse_string(const std::string& text) {
        Config cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw config_error("line " + std::to_string(lineno) + ": expected key = value");
            std::string key = trim(trimmed.substr(0, eq));
            std::string val = trim(trimmed.substr(eq + 1));
            if (key.empty()) throw config_error("line " + std::to_string(lineno) + ": empty key");
            cfg.values_[key] = val;
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& dflt) const {
        touch(key);
        auto it = values_.find(key);
        return it == values_.end() ? dflt : it->second;
    }
    std::string require_string(const std::string& key) const {
        touch(key);
        auto it = values_.find(key);
        if (it == values_.end()) throw config_error("missing required key: " + key);
        return it->second;
    }
    long get_long(const std::string& key, long dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) { touch(key); return dflt; }
        return parse_long(key, it->second);
    }
    double get_double(const std::string& key, double dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) { touch(key); return dflt; }
        touch(key);
        try {
            size_t used = 0;
            double v = std::stod(it->second, &used);
            if (used != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw config_error("key " + key + ": bad number '" + it->second + "'");
        }
    }
    bool get_bool(const std::string& key, bool dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) { touch(key); return dflt; }
        touch(key);
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw config_error("key " + key + ": expected true/false");
    }
    std::vector<double> get_doubles(const std::string& key) const {
        touch(key);
        std::vector<double> out;
        auto it = values_.find(key);
        if (it == values_.end()) return out;
        for (const std::string& tok : split(it->second, ',')) {
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw config_error("key " + key + ": bad number '" + tok + "'");
            }
        }
        return out;
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    // Keys whose value holds a comma become sweep axes; an empty value is an
    // axis with no cells.
    std::vector<std::string> list_keys() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : values_)
            if (v.empty() || v.find(',') != std::string::npos) out.push_back(k);
        return out;
    }
    std::vector<std::string> list_values(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end() || it->second.empty()) return {};
        std::vector<std::string> out;
        for (const std::string& tok : split(it->second, ',')) out.push_back(tok);
        return out;
    }

    // Call after the consumer read everything it understands.
    void reject_unknown_keys() const {
        for (const auto& [k, v] : values_)
            if (!touched_.count(k)) throw config_error("unknown key: " + k);
    }

    const std::map<std::string, std::string>& raw() const { return values_; }

private:
    long parse_long(const std::string& key, const std::string& v) const {
        touch(key);
        try {
            size_t used = 0;
            long out = std::stol(v, &used);
            if (used != v.size()) throw std::invalid_argument("trailing");
            return out;
        } catch (const std::exception&) {
            throw config_error("key " + key + ": bad integer '" + v + "'");
        }
    }
    static std::string trim(const std::string& s) {
        size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }
    static std::vector<std::string> split(const std::string& s, char sep) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : s) {
            if (c == sep) {
                out.push_back(trim(cur));
                cur.clear();
            } else {
                cur.push_back(c);
            }
        }
        out.push_back(trim(cur));
        return out;
    }
    void touch(const std::string& key) const { touched_.insert(key); }

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> touched_;
};

} // namespace solsim
