#pragma once

#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rlab/rational.hpp"

namespace rlab {

// Raised for malformed input; the message always carries a line number so a
// bad file can be fixed without guessing.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Line-oriented key = value store. '#' starts a comment, blank lines are
// ignored, keys may be dotted (section.key), duplicates are rejected.
class Config {
public:
    Config() = default;

    static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
        Config cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            cfg.absorb_line(line, lineno, origin);
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str(), path);
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    const std::map<std::string, std::string>& entries() const { return entries_; }

    // Command-line overrides land here after file parsing; last write wins.
    void set(const std::string& key, const std::string& value) { entries_[key] = value; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = entries_.find(key);
        return it == entries_.end() ? fallback : it->second;
    }

    std::string require_string(const std::string& key) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) throw ConfigError("missing required config key: " + key);
        return it->second;
    }

    int get_int(const std::string& key, int fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        return parse_int(key, it->second);
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        return parse_double(key, it->second);
    }

    Rational get_rational(const std::string& key, const Rational& fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        try {
            return Rational::parse(it->second);
        } catch (const std::exception& e) {
            throw ConfigError("config key '" + key + "': " + e.what());
        }
    }

    std::vector<double> get_double_list(const std::string& key, const std::vector<double>& fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        std::vector<double> out;
        std::istringstream in(it->second);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            out.push_back(parse_double(key, trim(tok)));
        }
        if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
        return out;
    }

    std::uint64_t get_seed(const std::string& key, std::uint64_t fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        try {
            std::size_t used = 0;
            unsigned long long v = std::stoull(it->second, &used);
            if (used != it->second.size()) throw std::invalid_argument("trailing characters");
            return static_cast<std::uint64_t>(v);
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': expected unsigned integer, got '" + it->second + "'");
        }
    }

private:
    std::map<std::string, std::string> entries_;

    static std::string trim(const std::string& s) {
        std::size_t b = 0, e = s.size();
        while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        return s.substr(b, e - b);
    }

    static bool valid_key(const std::string& k) {
        if (k.empty() || k.front() == '.' || k.back() == '.') return false;
        for (char c : k) {
            bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
            if (!ok) return false;
        }
        return true;
    }

    void absorb_line(const std::string& raw, int lineno, const std::string& origin) {
        std::string line = raw;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) return;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!valid_key(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": invalid key '" + key + "'");
        if (value.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty value for key '" + key + "'");
        if (entries_.count(key))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        entries_[key] = value;
    }

    static int parse_int(const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            int out = std::stoi(v, &used);
            if (used != v.size()) throw std::invalid_argument("trailing characters");
            return out;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': expected integer, got '" + v + "'");
        }
    }

    static double parse_double(const std::string& key, const std::string& v) {
        try {
            std::size_t used = 0;
            double out = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument("trailing characters");
            return out;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': expected number, got '" + v + "'");
        }
    }
};

} // namespace rlab
