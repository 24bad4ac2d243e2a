#pragma once

// Artifact emission: CSV tables, JSON reports, and a small structural
// JSON-schema checker. All numeric text uses %.17g so identical inputs
// produce byte-identical files; writes go through a temp file + rename.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "slowfast/analysis.hpp"
#include "slowfast/errors.hpp"
#include "slowfast/integrator.hpp"
#include "slowfast/verification.hpp"

namespace slowfast {

using json = nlohmann::json;

inline std::string fmt_g17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void write_text_atomic(const std::filesystem::path& path,
                              const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw Error("cannot open " + tmp.string() + " for writing");
        os << content;
        if (!os) throw Error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline void write_json_atomic(const std::filesystem::path& path, const json& j) {
    write_text_atomic(path, j.dump(2) + "\n");
}

template <std::size_t N>
std::string orbit_csv(const OrbitPath<N>& path) {
    std::string out = "t,a,b\n";
    for (std::size_t i = 0; i < path.t.size(); ++i) {
        out += fmt_g17(path.t[i]);
        out += ',';
        out += fmt_g17(path.y[i][0]);
        out += ',';
        out += fmt_g17(path.y[i][N > 1 ? 1 : 0]);
        out += '\n';
    }
    return out;
}

inline std::string scan_csv(const std::vector<ScanPoint>& scan) {
    std::string out = "s,chi,chi_err,lambda,lambda_err,a_alpha,a_omega,ok,error\n";
    for (const auto& p : scan) {
        out += fmt_g17(p.s);
        for (double v : {p.vals.chi, p.vals.chi_err, p.vals.lambda,
                         p.vals.lambda_err, p.vals.a_alpha, p.vals.a_omega}) {
            out += ',';
            out += fmt_g17(v);
        }
        out += ',';
        out += p.ok ? "1" : "0";
        out += ',';
        std::string msg = p.error;
        for (char& ch : msg)
            if (ch == ',' || ch == '\n') ch = ';';
        out += msg;
        out += '\n';
    }
    return out;
}

inline json candidate_json(const CycleCandidate& c) {
    json j;
    j["s0"] = c.s0;
    j["chi"] = c.vals.chi;
    j["chi_err"] = c.vals.chi_err;
    j["lambda"] = c.lambda0;
    j["lambda_err"] = c.vals.lambda_err;
    j["lambda_form"] = to_string(c.vals.lambda_form);
    j["lambda_general"] = c.vals.lambda_general_value;
    j["stability"] = to_string(c.stability);
    j["a_alpha"] = c.gamma.a_alpha;
    j["a_omega"] = c.gamma.a_omega;
    j["peak_b"] = c.gamma.peak_b;
    j["predicted_period_coeff"] = c.predicted_period_coeff;
    j["chi_prime"] = c.chi_prime;
    j["bracket"] = {c.bracket_lo, c.bracket_hi};
    return j;
}

inline json candidates_json(const std::string& model_name, const CandidateSet& set) {
    json j;
    j["model"] = model_name;
    j["candidates"] = json::array();
    for (const auto& c : set.candidates) j["candidates"].push_back(candidate_json(c));
    j["warnings"] = set.warnings;
    return j;
}

inline json verification_json(const VerificationReport& r) {
    json j;
    j["epsilon"] = r.epsilon;
    j["candidate_s0"] = r.candidate_s0;
    j["delta1"] = r.delta1;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["fixed_point_a"] = r.fixed_point_a;
    j["measured_period"] = r.measured_period;
    j["predicted_period"] = r.predicted_period;
    j["orbit_distance"] = r.orbit_distance;
    j["orbit_distance_over_eps"] = r.orbit_distance / r.epsilon;
    j["floquet_estimate"] = r.floquet_estimate;
    j["exp_lambda"] = r.exp_lambda;
    j["floquet_degraded"] = r.floquet_degraded;
    j["diagnostic"] = r.diagnostic;
    return j;
}

// Structural schema check: supports type, properties, required, items,
// enum, minimum. Returns human-readable violations with JSON paths.
inline void schema_check_rec(const json& value, const json& schema,
                             const std::string& path,
                             std::vector<std::string>& errors) {
    if (schema.contains("type")) {
        const std::string t = schema["type"];
        bool ok = (t == "object" && value.is_object()) ||
                  (t == "array" && value.is_array()) ||
                  (t == "string" && value.is_string()) ||
                  (t == "number" && value.is_number()) ||
                  (t == "integer" && value.is_number_integer()) ||
                  (t == "boolean" && value.is_boolean());
        if (!ok) {
            errors.push_back(path + ": expected " + t);
            return;
        }
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& e : schema["enum"]) ok |= (e == value);
        if (!ok) errors.push_back(path + ": not one of the allowed values");
    }
    if (schema.contains("minimum") && value.is_number() &&
        value.get<double>() < schema["minimum"].get<double>())
        errors.push_back(path + ": below minimum " +
                         fmt_g17(schema["minimum"].get<double>()));
    if (value.is_object()) {
        if (schema.contains("required"))
            for (const auto& k : schema["required"])
                if (!value.contains(k.get<std::string>()))
                    errors.push_back(path + ": missing required key '" +
                                     k.get<std::string>() + "'");
        if (schema.contains("properties"))
            for (auto it = schema["properties"].begin();
                 it != schema["properties"].end(); ++it)
                if (value.contains(it.key()))
                    schema_check_rec(value[it.key()], it.value(),
                                     path + "." + it.key(), errors);
    }
    if (value.is_array() && schema.contains("items")) {
        std::size_t i = 0;
        for (const auto& el : value) {
            schema_check_rec(el, schema["items"], path + "[" + std::to_string(i) + "]",
                             errors);
            ++i;
        }
    }
}

inline std::vector<std::string> schema_check(const json& value, const json& schema) {
    std::vector<std::string> errors;
    schema_check_rec(value, schema, "$", errors);
    return errors;
}

} // namespace slowfast
