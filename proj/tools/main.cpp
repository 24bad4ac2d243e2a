// Command-line front end. Pipeline: validate -> orbits -> chi/lambda scan
// -> candidates -> verify. Exit codes: 0 ok, 2 config error, 3 numeric
// failure, 4 no candidates.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "slowfast/pipeline.hpp"

namespace fs = std::filesystem;
using namespace slowfast;

namespace {

json read_json_file(const fs::path& p, const std::string& producer) {
    std::ifstream is(p);
    if (!is)
        throw ConfigError("missing artifact " + p.string() + "; run the '" +
                          producer + "' subcommand first");
    json j;
    is >> j;
    return j;
}

int cmd_analyze(const std::string& config_path, const std::string& out_dir) {
    auto rc = load_run_config(config_path);
    auto res = run_analyze(rc, out_dir);
    if (res.exit_code != exit_ok)
        std::cerr << "analyze: " << res.message << "\n";
    else
        std::cout << "analyze: " << res.candidates.candidates.size()
                  << " candidate(s), artifacts in " << out_dir << "\n";
    return res.exit_code;
}

int cmd_orbit(const std::string& config_path, const std::string& out_dir, double s) {
    auto rc = load_run_config(config_path);
    auto bundle = make_bundle(rc);
    fs::create_directories(out_dir);
    auto orbit = bundle.family(s);
    write_text_atomic(fs::path(out_dir) / "orbit.csv", orbit_csv(orbit.path));
    json meta;
    meta["model"] = bundle.model.name;
    meta["s"] = orbit.s;
    meta["a_alpha"] = orbit.a_alpha;
    meta["a_omega"] = orbit.a_omega;
    meta["peak_b"] = orbit.peak_b;
    meta["seed_offset"] = orbit.seed_offset;
    meta["tail_cut"] = orbit.tail_cut;
    write_json_atomic(fs::path(out_dir) / "orbit.json", meta);
    std::cout << "orbit: s=" << s << " a_alpha=" << orbit.a_alpha
              << " a_omega=" << orbit.a_omega << "\n";
    return exit_ok;
}

// chi/lambda consume the stored orbit metadata; the orbit itself is
// recomputed deterministically from s.
int cmd_characteristic(const std::string& config_path, const std::string& out_dir,
                       bool want_lambda) {
    auto rc = load_run_config(config_path);
    auto bundle = make_bundle(rc);
    json meta = read_json_file(fs::path(out_dir) / "orbit.json", "orbit");
    if (meta["model"].get<std::string>() != bundle.model.name)
        throw ConfigError("orbit.json was produced for model '" +
                          meta["model"].get<std::string>() + "'");
    auto orbit = bundle.family(meta["s"].get<double>());
    auto vals = evaluate_characteristics(bundle.model, orbit);
    json j;
    j["s"] = vals.s;
    if (want_lambda) {
        j["lambda"] = vals.lambda;
        j["lambda_err"] = vals.lambda_err;
        j["lambda_form"] = to_string(vals.lambda_form);
        j["lambda_general"] = vals.lambda_general_value;
    } else {
        j["chi"] = vals.chi;
        j["chi_err"] = vals.chi_err;
        j["chi_line"] = vals.chi_line;
        j["chi_line_err"] = vals.chi_line_err;
    }
    const char* name = want_lambda ? "lambda.json" : "chi.json";
    write_json_atomic(fs::path(out_dir) / name, j);
    std::cout << (want_lambda ? "lambda = " : "chi = ")
              << (want_lambda ? vals.lambda : vals.chi) << "\n";
    return exit_ok;
}

int cmd_verify(const std::string& config_path, const std::string& out_dir) {
    auto rc = load_run_config(config_path);
    if (rc.epsilons.empty())
        throw ConfigError("$.verify.epsilons: empty; nothing to verify");
    auto bundle = make_bundle(rc);
    json cj = read_json_file(fs::path(out_dir) / "candidates.json", "analyze");
    if (cj["candidates"].empty()) {
        std::cerr << "verify: candidates.json lists no candidates\n";
        return exit_no_candidates;
    }
    json vr = json::array();
    std::size_t ci = 0;
    for (const auto& c : cj["candidates"]) {
        CycleCandidate cand;
        cand.s0 = c["s0"].get<double>();
        cand.gamma = bundle.family(cand.s0);
        cand.vals = evaluate_characteristics(bundle.model, cand.gamma);
        cand.lambda0 = cand.vals.lambda;
        std::string st = c["stability"].get<std::string>();
        cand.stability = st == "stable" ? Stability::stable
                        : st == "unstable" ? Stability::unstable
                                           : Stability::degenerate;
        cand.predicted_period_coeff = period_coefficient(bundle.model, cand.gamma);
        if (cand.stability == Stability::degenerate) { ++ci; continue; }
        for (double eps : rc.epsilons) {
            VerifyOptions vo;
            vo.tol = rc.tol;
            vo.t_max_factor = rc.t_max_factor;
            if (rc.delta1 > 0.0) vo.delta1 = rc.delta1;
            auto rep = find_periodic_orbit(bundle.model, eps, cand, vo);
            json rj = verification_json(rep);
            rj["candidate_index"] = ci;
            if (rep.converged) {
                auto fl = floquet_check(bundle.model, eps, cand, rep, vo);
                rj["floquet_estimate"] = fl.det_DP;
                rj["floquet_gap"] = fl.gap;
                rj["floquet_degraded"] = fl.degraded;
            }
            vr.push_back(rj);
        }
        ++ci;
    }
    json vfile;
    vfile["model"] = bundle.model.name;
    vfile["reports"] = vr;
    write_json_atomic(fs::path(out_dir) / "verification.json", vfile);
    std::cout << "verify: " << vr.size() << " report(s)\n";
    return exit_ok;
}

json* navigate(json& root, const std::string& dotted) {
    json* cur = &root;
    std::size_t pos = 0;
    while (true) {
        std::size_t dot = dotted.find('.', pos);
        std::string key = dotted.substr(pos, dot - pos);
        if (!cur->contains(key)) return nullptr;
        cur = &(*cur)[key];
        if (dot == std::string::npos) return cur;
        pos = dot + 1;
    }
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              const std::string& param, const std::vector<double>& values) {
    json base = parse_toml_file(config_path);
    fs::create_directories(out_dir);
    json agg = json::array();
    int worst = exit_ok;
    for (std::size_t i = 0; i < values.size(); ++i) {
        json user = base;
        json* slot = navigate(user, param);
        if (slot) *slot = values[i];
        else {
            // key absent in the user file: set it explicitly
            json* cur = &user;
            std::string rest = param;
            for (std::size_t dot; (dot = rest.find('.')) != std::string::npos;
                 rest = rest.substr(dot + 1))
                cur = &(*cur)[rest.substr(0, dot)];
            (*cur)[rest] = values[i];
        }
        auto rc = make_run_config(user);
        fs::path sub = fs::path(out_dir) / ("sweep_" + std::to_string(i));
        auto res = run_analyze(rc, sub);
        worst = std::max(worst, res.exit_code == exit_no_candidates && worst == exit_ok
                                    ? exit_ok : res.exit_code);
        json entry;
        entry["param"] = param;
        entry["value"] = values[i];
        entry["exit_code"] = res.exit_code;
        entry["out"] = sub.string();
        entry["candidates"] = candidates_json("", res.candidates)["candidates"];
        agg.push_back(entry);
        std::cout << "sweep " << param << "=" << values[i] << ": "
                  << res.candidates.candidates.size() << " candidate(s)\n";
    }
    json out;
    out["sweep"] = agg;
    write_json_atomic(fs::path(out_dir) / "sweep.json", out);
    return worst;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"relaxation-oscillation analysis for planar slow-fast systems"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    double s_value = 0.0;
    std::string sweep_param;
    std::vector<double> sweep_values;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "TOML config file")->required();
        cmd->add_option("--out", out_dir, "output directory");
    };
    auto* a = app.add_subcommand("analyze", "full pipeline");
    add_common(a);
    auto* o = app.add_subcommand("orbit", "compute one heteroclinic orbit");
    add_common(o);
    o->add_option("--s", s_value, "family parameter")->required();
    auto* ch = app.add_subcommand("chi", "chi on the stored orbit");
    add_common(ch);
    auto* la = app.add_subcommand("lambda", "lambda on the stored orbit");
    add_common(la);
    auto* ve = app.add_subcommand("verify", "verify stored candidates");
    add_common(ve);
    auto* sw = app.add_subcommand("sweep", "fan out over a parameter grid");
    add_common(sw);
    sw->add_option("--param", sweep_param, "dotted config key")->required();
    sw->add_option("--values", sweep_values, "values to sweep")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (a->parsed()) return cmd_analyze(config_path, out_dir);
        if (o->parsed()) return cmd_orbit(config_path, out_dir, s_value);
        if (ch->parsed()) return cmd_characteristic(config_path, out_dir, false);
        if (la->parsed()) return cmd_characteristic(config_path, out_dir, true);
        if (ve->parsed()) return cmd_verify(config_path, out_dir);
        if (sw->parsed()) return cmd_sweep(config_path, out_dir, sweep_param, sweep_values);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const Error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return exit_numeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_numeric;
    }
    return exit_config;
}
