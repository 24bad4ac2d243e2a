#pragma once

// Run configuration: a small TOML subset (tables, scalars, single-line
// arrays, comments) parsed into JSON, merged over per-model defaults, and
// validated with path-precise error messages. The merged object is written
// back out as the run manifest so every run is self-describing.

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "slowfast/errors.hpp"
#include "slowfast/integrator.hpp"

namespace slowfast {

using json = nlohmann::json;

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// strip a trailing comment, respecting quoted strings
inline std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '"' && (i == 0 || s[i - 1] != '\\')) in_str = !in_str;
        else if (c == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

inline json parse_toml_scalar(const std::string& raw, int lineno) {
    std::string v = trim(raw);
    if (v.empty())
        throw ConfigError("config line " + std::to_string(lineno) + ": empty value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"')
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": unterminated string");
        std::string out;
        for (std::size_t i = 1; i + 1 < v.size(); ++i) {
            if (v[i] == '\\' && i + 2 < v.size()) {
                ++i;
                out += (v[i] == 'n') ? '\n' : (v[i] == 't') ? '\t' : v[i];
            } else out += v[i];
        }
        return out;
    }
    if (v == "true") return true;
    if (v == "false") return false;
    try {
        std::size_t used = 0;
        if (v.find_first_of(".eE") == std::string::npos ||
            v.find("inf") != std::string::npos) {
            long long i = std::stoll(v, &used);
            if (used == v.size()) return i;
        }
        double d = std::stod(v, &used);
        if (used == v.size()) return d;
    } catch (const std::exception&) {}
    throw ConfigError("config line " + std::to_string(lineno) +
                      ": cannot parse value '" + v + "'");
}

inline json parse_toml_value(const std::string& raw, int lineno) {
    std::string v = trim(raw);
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']')
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": arrays must close on the same line");
        json arr = json::array();
        std::string body = v.substr(1, v.size() - 2);
        std::string cur;
        bool in_str = false;
        for (char c : body) {
            if (c == '"') in_str = !in_str;
            if (c == ',' && !in_str) {
                if (!trim(cur).empty()) arr.push_back(parse_toml_scalar(cur, lineno));
                cur.clear();
            } else cur += c;
        }
        if (!trim(cur).empty()) arr.push_back(parse_toml_scalar(cur, lineno));
        return arr;
    }
    return parse_toml_scalar(v, lineno);
}

} // namespace detail

inline json parse_toml(std::istream& is) {
    json root = json::object();
    json* table = &root;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string s = detail::trim(detail::strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": malformed table header");
            std::string path = detail::trim(s.substr(1, s.size() - 2));
            if (path.empty())
                throw ConfigError("config line " + std::to_string(lineno) +
                                  ": empty table name");
            table = &root;
            std::stringstream ss(path);
            std::string part;
            while (std::getline(ss, part, '.')) {
                part = detail::trim(part);
                if (!table->contains(part)) (*table)[part] = json::object();
                table = &(*table)[part];
            }
            continue;
        }
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) +
                              ": expected 'key = value'");
        std::string key = detail::trim(s.substr(0, eq));
        if (key.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (!key.empty() && key.front() == '"' && key.back() == '"')
            key = key.substr(1, key.size() - 2);
        (*table)[key] = detail::parse_toml_value(s.substr(eq + 1), lineno);
    }
    return root;
}

inline json parse_toml_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config file: " + path);
    return parse_toml(is);
}

inline json default_config() {
    json c;
    c["model"] = "chemostat";
    c["seed"] = 0; // reserved, unused by numerics
    c["scan"] = {{"s_lo", 0.0}, {"s_hi", 0.0}, {"n_grid", 48}};
    c["tolerances"] = {{"rel", 1e-9},     {"abs", 1e-12}, {"root_tol", 0.0},
                       {"lambda_tol", 0.0}, {"delta", 0.0}, {"b_stop", 0.0},
                       {"delta1", 0.0}};
    c["verify"] = {{"epsilons", json::array()}, {"t_max_factor", 50.0}};
    c["validate"] = {{"na", 200}, {"nb", 200}};
    c["chemostat"] = {{"S0", 10.0},       {"m", 1.0},       {"rho", 1.0},
                      {"c", 1.0},         {"half_sat", 1.5}, {"max_rate", 3.0}};
    c["epidemic"] = {{"D", 0.2},   {"p", 0.01},      {"alpha", 0.048},
                     {"beta", 1.0}, {"gamma", 0.75},  {"m_sat", 0.1},
                     {"d", 0.2},    {"N_max", 400.0}, {"r", 1.0},
                     {"profile", "logistic"},
                     {"c1", 60.0},  {"c2", 0.04},     {"c3", 90.0}};
    c["epidemic"]["manifold"] = {{"M", 120},    {"nt", 8000}, {"delta", 0.0},
                                 {"T", 0.0},    {"cache", ""}};
    c["toy"] = {{"g0", 0.0}, {"gb", 0.0}, {"a_min", -10.0}, {"a_max", 10.0},
                {"b_max", 5.0}};
    return c;
}

namespace detail {

inline void deep_merge(json& base, const json& over, const std::string& path,
                       std::vector<std::string>& unknown) {
    for (auto it = over.begin(); it != over.end(); ++it) {
        std::string p = path + "." + it.key();
        if (!base.contains(it.key())) {
            unknown.push_back(p);
            continue;
        }
        json& tgt = base[it.key()];
        if (tgt.is_object() && it.value().is_object())
            deep_merge(tgt, it.value(), p, unknown);
        else if (tgt.is_object() != it.value().is_object())
            throw ConfigError(p + ": type mismatch (table vs value)");
        else
            tgt = it.value();
    }
}

inline double req_num(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    return j.get<double>();
}

inline double req_pos(const json& j, const std::string& path) {
    double v = req_num(j, path);
    if (!(v > 0.0)) throw ConfigError(path + ": must be positive");
    return v;
}

inline double req_nonneg(const json& j, const std::string& path) {
    double v = req_num(j, path);
    if (!(v >= 0.0)) throw ConfigError(path + ": must be nonnegative");
    return v;
}

} // namespace detail

struct RunConfig {
    json raw; // defaults merged with the user file; becomes the manifest
    std::string model;
    double s_lo = 0.0, s_hi = 0.0;
    std::size_t n_grid = 48;
    Tolerances tol;
    double root_tol = 0.0, lambda_tol = 0.0;
    double delta = 0.0, b_stop = 0.0, delta1 = 0.0;
    std::vector<double> epsilons;
    double t_max_factor = 50.0;
    std::size_t grid_na = 200, grid_nb = 200;
};

inline RunConfig make_run_config(const json& user) {
    RunConfig rc;
    rc.raw = default_config();
    std::vector<std::string> unknown;
    detail::deep_merge(rc.raw, user, "$", unknown);
    if (!unknown.empty())
        throw ConfigError("unknown config key: " + unknown.front());

    const json& c = rc.raw;
    if (!c["model"].is_string()) throw ConfigError("$.model: expected a string");
    rc.model = c["model"].get<std::string>();
    if (rc.model != "chemostat" && rc.model != "epidemic" && rc.model != "toy")
        throw ConfigError("$.model: must be one of chemostat, epidemic, toy");

    rc.s_lo = detail::req_num(c["scan"]["s_lo"], "$.scan.s_lo");
    rc.s_hi = detail::req_num(c["scan"]["s_hi"], "$.scan.s_hi");
    if (!c["scan"]["n_grid"].is_number_integer() ||
        c["scan"]["n_grid"].get<long long>() < 8)
        throw ConfigError("$.scan.n_grid: expected an integer >= 8");
    rc.n_grid = c["scan"]["n_grid"].get<std::size_t>();

    const json& t = c["tolerances"];
    rc.tol.rel = detail::req_pos(t["rel"], "$.tolerances.rel");
    rc.tol.abs = detail::req_pos(t["abs"], "$.tolerances.abs");
    rc.root_tol = detail::req_nonneg(t["root_tol"], "$.tolerances.root_tol");
    rc.lambda_tol = detail::req_nonneg(t["lambda_tol"], "$.tolerances.lambda_tol");
    rc.delta = detail::req_nonneg(t["delta"], "$.tolerances.delta");
    rc.b_stop = detail::req_nonneg(t["b_stop"], "$.tolerances.b_stop");
    rc.delta1 = detail::req_nonneg(t["delta1"], "$.tolerances.delta1");

    const json& eps = c["verify"]["epsilons"];
    if (!eps.is_array()) throw ConfigError("$.verify.epsilons: expected an array");
    double prev = std::numeric_limits<double>::infinity();
    std::size_t i = 0;
    for (const auto& e : eps) {
        std::string p = "$.verify.epsilons[" + std::to_string(i++) + "]";
        double v = detail::req_pos(e, p);
        if (!(v < prev)) throw ConfigError(p + ": list must be sorted descending");
        prev = v;
        rc.epsilons.push_back(v);
    }
    rc.t_max_factor = detail::req_pos(c["verify"]["t_max_factor"],
                                      "$.verify.t_max_factor");

    for (const char* k : {"na", "nb"}) {
        const json& v = c["validate"][k];
        if (!v.is_number_integer() || v.get<long long>() < 2)
            throw ConfigError(std::string("$.validate.") + k +
                              ": expected an integer >= 2");
    }
    rc.grid_na = c["validate"]["na"].get<std::size_t>();
    rc.grid_nb = c["validate"]["nb"].get<std::size_t>();
    return rc;
}

inline RunConfig load_run_config(const std::string& path) {
    return make_run_config(parse_toml_file(path));
}

} // namespace slowfast
