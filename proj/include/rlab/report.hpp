#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rlab/config.hpp"

namespace rlab {

// One named numeric check with its pinned tolerance. "measured" is whatever
// the check compares against the tolerance (a residual, a ratio, a slope
// error), so a report stays meaningful even when it fails.
struct Assertion {
    std::string name;
    double tolerance = 0.0;
    double measured = 0.0;
    bool pass = false;
};

// Everything one experiment run wants to persist: an echo of the resolved
// settings, a rectangular table of sweep data, named scalar diagnostics, the
// assertion list, and free-form notes for degenerate cases.
struct Report {
    std::string id;
    std::map<std::string, std::string> config;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, double>> diagnostics;
    std::vector<Assertion> assertions;
    std::vector<std::string> notes;
    bool sub_acceptance = false;

    bool pass() const {
        for (const auto& a : assertions)
            if (!a.pass) return false;
        return true;
    }

    void add_row(std::initializer_list<double> cells) { rows.emplace_back(cells); }

    void assert_leq(const std::string& name, double measured, double tolerance) {
        assertions.push_back({name, tolerance, measured, measured <= tolerance});
    }

    void assert_geq(const std::string& name, double measured, double floor_value) {
        assertions.push_back({name, floor_value, measured, measured >= floor_value});
    }

    void assert_true(const std::string& name, bool ok) {
        assertions.push_back({name, 1.0, ok ? 1.0 : 0.0, ok});
    }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["id"] = id;
        j["pass"] = pass();
        j["sub_acceptance"] = sub_acceptance;
        nlohmann::ordered_json jc = nlohmann::ordered_json::object();
        for (const auto& [k, v] : config) jc[k] = v;
        j["config"] = jc;
        j["columns"] = columns;
        j["rows"] = rows;
        nlohmann::ordered_json jd = nlohmann::ordered_json::object();
        for (const auto& [k, v] : diagnostics) jd[k] = v;
        j["diagnostics"] = jd;
        nlohmann::ordered_json ja = nlohmann::ordered_json::array();
        for (const auto& a : assertions) {
            nlohmann::ordered_json e;
            e["name"] = a.name;
            e["tolerance"] = a.tolerance;
            e["measured"] = a.measured;
            e["pass"] = a.pass;
            ja.push_back(e);
        }
        j["assertions"] = ja;
        j["notes"] = notes;
        return j;
    }

    std::string to_csv() const {
        std::ostringstream out;
        out << std::setprecision(17);
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (c) out << ',';
            out << columns[c];
        }
        out << '\n';
        for (const auto& row : rows) {
            if (row.size() != columns.size())
                throw std::logic_error("report '" + id + "': row width does not match column count");
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out << ',';
                out << row[c];
            }
            out << '\n';
        }
        return out.str();
    }
};

// Highest priority wins: explicit flag, then the environment override, then
// the config file, then ./reports next to wherever the tool runs.
inline std::string resolve_report_dir(const std::string& cli_dir, const Config& cfg) {
    if (!cli_dir.empty()) return cli_dir;
    if (const char* env = std::getenv("RESTRICTLAB_REPORT_DIR"); env && *env) return env;
    return cfg.get_string("report.dir", "reports");
}

namespace detail {

inline void write_file_atomic(const std::filesystem::path& target, const std::string& payload) {
    std::filesystem::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << payload;
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

} // namespace detail

// Persists <id>.json and <id>.csv under dir, creating it if needed. Files are
// staged with a .tmp suffix and renamed so readers never see partial output.
// Returns the JSON path.
inline std::string write_report(const Report& rep, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::path root(dir);
    fs::create_directories(root);
    fs::path jpath = root / (rep.id + ".json");
    detail::write_file_atomic(jpath, rep.to_json().dump(2) + "\n");
    detail::write_file_atomic(root / (rep.id + ".csv"), rep.to_csv());
    return jpath.string();
}

} // namespace rlab
