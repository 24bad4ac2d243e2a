#pragma once

// Orchestration: config -> model bundle -> validate -> scan -> candidates
// -> verification, with all artifacts written to an output directory.
// Exit codes: 0 ok, 2 config error, 3 numeric failure, 4 no candidates.

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "slowfast/analysis.hpp"
#include "slowfast/config.hpp"
#include "slowfast/io.hpp"
#include "slowfast/models/chemostat.hpp"
#include "slowfast/models/epidemic.hpp"
#include "slowfast/models/toy.hpp"
#include "slowfast/verification.hpp"

namespace slowfast {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_numeric = 3;
inline constexpr int exit_no_candidates = 4;

struct ModelBundle {
    SlowFastModel model;
    OrbitProvider family;
    double s_lo = 0.0, s_hi = 0.0; // defaulted scan window
    GridSpec grid;
    // model-specific extras kept alive for the evaluators' lifetime
    std::shared_ptr<ChemostatParams> chemostat;
    std::shared_ptr<EpidemicParams> epidemic;
    std::shared_ptr<CenterManifoldTable> table;
};

inline ModelBundle make_bundle(const RunConfig& rc) {
    ModelBundle b;
    if (rc.model == "chemostat") {
        const json& p = rc.raw["chemostat"];
        b.chemostat = std::make_shared<ChemostatParams>(make_chemostat_holling2(
            p["S0"].get<double>(), p["m"].get<double>(), p["rho"].get<double>(),
            p["c"].get<double>(), p["half_sat"].get<double>(),
            p["max_rate"].get<double>()));
        b.model = chemostat_reduced(*b.chemostat);
        auto prm = b.chemostat;
        // capture a copy: the provider must not dangle if the bundle moves
        SlowFastModel model_copy = b.model;
        ChemostatFamilyOptions fo;
        fo.tol = rc.tol;
        if (rc.b_stop > 0.0) fo.b_stop = rc.b_stop;
        b.family = [model_copy, prm, fo](double s) {
            return chemostat_orbit(model_copy, *prm, s, fo);
        };
        double xm = prm->x_max();
        b.s_lo = 0.02 * xm;
        b.s_hi = 0.98 * xm;
        b.grid = {b.model.a_min, b.model.a_max, 1.05 * xm, rc.grid_na, rc.grid_nb};
    } else if (rc.model == "epidemic") {
        const json& p = rc.raw["epidemic"];
        auto prm = std::make_shared<EpidemicParams>();
        prm->D = p["D"].get<double>();
        prm->p = p["p"].get<double>();
        prm->alpha = p["alpha"].get<double>();
        prm->beta = p["beta"].get<double>();
        prm->gamma_rec = p["gamma"].get<double>();
        prm->m_sat = p["m_sat"].get<double>();
        prm->d = p["d"].get<double>();
        prm->N_max = p["N_max"].get<double>();
        prm->r = p["r"].get<double>();
        std::string prof = p["profile"].get<std::string>();
        if (prof == "logistic") prm->profile = EpidemicProfile::logistic;
        else if (prof == "deformed") prm->profile = EpidemicProfile::deformed;
        else throw ConfigError("$.epidemic.profile: must be logistic or deformed");
        prm->c1 = p["c1"].get<double>();
        prm->c2 = p["c2"].get<double>();
        prm->c3 = p["c3"].get<double>();
        b.epidemic = prm;

        const json& mf = p["manifold"];
        std::string cache = mf["cache"].get<std::string>();
        if (!cache.empty() && std::filesystem::exists(cache)) {
            b.table = std::make_shared<CenterManifoldTable>(
                CenterManifoldTable::load_csv(cache, *prm));
        } else {
            CmBuildOptions co;
            co.M = mf["M"].get<std::size_t>();
            co.nt = mf["nt"].get<std::size_t>();
            if (mf["delta"].get<double>() > 0.0) co.delta = mf["delta"].get<double>();
            if (mf["T"].get<double>() > 0.0) co.T = mf["T"].get<double>();
            b.table = std::make_shared<CenterManifoldTable>(
                build_center_manifold(*prm, co));
            if (!cache.empty()) b.table->save_csv(cache);
        }
        b.model = epidemic_reduced(*prm, *b.table);
        SlowFastModel model_copy = b.model;
        HetOptions ho;
        ho.tol = rc.tol;
        if (rc.delta > 0.0) ho.delta = rc.delta;
        if (rc.b_stop > 0.0) ho.b_stop = rc.b_stop;
        b.family = [model_copy, ho](double s) {
            return compute_heteroclinic(model_copy, s, ho);
        };
        double N0 = b.model.a_bar;
        b.s_lo = N0 + 0.05 * (prm->N_max - N0);
        b.s_hi = prm->N_max - 0.02 * (prm->N_max - N0);
        b.grid = {1.0, prm->N_max, 50.0, rc.grid_na, rc.grid_nb};
    } else if (rc.model == "toy") {
        const json& p = rc.raw["toy"];
        ToyParams tp;
        tp.g0 = p["g0"].get<double>();
        tp.gb = p["gb"].get<double>();
        tp.a_min = p["a_min"].get<double>();
        tp.a_max = p["a_max"].get<double>();
        tp.b_max = p["b_max"].get<double>();
        b.model = toy_model(tp);
        SlowFastModel model_copy = b.model;
        HetOptions ho;
        ho.tol = rc.tol;
        if (rc.delta > 0.0) ho.delta = rc.delta;
        if (rc.b_stop > 0.0) ho.b_stop = rc.b_stop;
        b.family = [model_copy, ho](double s) {
            return compute_heteroclinic(model_copy, s, ho);
        };
        b.s_lo = tp.g0 + 0.05 * (tp.a_max - tp.g0);
        b.s_hi = tp.g0 + 0.80 * (tp.a_max - tp.g0);
        b.grid = {tp.a_min, tp.a_max, tp.b_max, rc.grid_na, rc.grid_nb};
    } else {
        throw ConfigError("$.model: unknown model " + rc.model);
    }
    return b;
}

struct AnalyzeResult {
    int exit_code = exit_ok;
    std::string message;
    ValidationReport validation;
    std::vector<ScanPoint> scan;
    CandidateSet candidates;
    std::vector<VerificationReport> reports;
    std::vector<FloquetResult> floquet;
};

inline AnalyzeResult run_analyze(const RunConfig& rc,
                                 const std::filesystem::path& out_dir) {
    AnalyzeResult res;
    std::filesystem::create_directories(out_dir);

    auto bundle = make_bundle(rc);
    double s_lo = rc.s_hi > rc.s_lo ? rc.s_lo : bundle.s_lo;
    double s_hi = rc.s_hi > rc.s_lo ? rc.s_hi : bundle.s_hi;

    // manifest first: the run is self-describing even on failure
    json manifest = rc.raw;
    manifest["scan"]["s_lo"] = s_lo;
    manifest["scan"]["s_hi"] = s_hi;
    manifest["resolved"] = {{"a_bar", bundle.model.a_bar},
                            {"workers", worker_count()}};
    write_json_atomic(out_dir / "manifest.json", manifest);

    res.validation = validate_model(bundle.model, bundle.grid);
    json vj;
    vj["ok"] = res.validation.ok();
    vj["summary"] = res.validation.summary();
    write_json_atomic(out_dir / "validation.json", vj);
    if (!res.validation.ok()) {
        res.exit_code = exit_numeric;
        res.message = "model validation failed: " + res.validation.summary();
        return res;
    }

    res.scan = scan_chi(bundle.model, bundle.family, s_lo, s_hi, rc.n_grid);
    write_text_atomic(out_dir / "scan.csv", scan_csv(res.scan));

    AnalysisOptions ao;
    ao.root_tol = rc.root_tol;
    ao.lambda_tol = rc.lambda_tol;
    res.candidates = find_candidates(bundle.model, bundle.family, res.scan, ao);
    write_json_atomic(out_dir / "candidates.json",
                      candidates_json(bundle.model.name, res.candidates));
    for (std::size_t i = 0; i < res.candidates.candidates.size(); ++i)
        write_text_atomic(out_dir / ("gamma_" + std::to_string(i) + ".csv"),
                          orbit_csv(res.candidates.candidates[i].gamma.path));
    if (res.candidates.candidates.empty()) {
        res.exit_code = exit_no_candidates;
        res.message = res.candidates.warnings.empty()
            ? "no chi sign changes in the scan window"
            : res.candidates.warnings.front();
        return res;
    }

    if (!rc.epsilons.empty()) {
        json vr = json::array();
        for (std::size_t ci = 0; ci < res.candidates.candidates.size(); ++ci) {
            const auto& cand = res.candidates.candidates[ci];
            if (cand.stability == Stability::degenerate) continue;
            for (double eps : rc.epsilons) {
                VerifyOptions vo;
                vo.tol = rc.tol;
                vo.t_max_factor = rc.t_max_factor;
                if (rc.delta1 > 0.0) vo.delta1 = rc.delta1;
                auto rep = find_periodic_orbit(bundle.model, eps, cand, vo);
                res.reports.push_back(rep);
                json rj = verification_json(rep);
                rj["candidate_index"] = ci;
                if (rep.converged) {
                    auto fl = floquet_check(bundle.model, eps, cand, rep, vo);
                    res.floquet.push_back(fl);
                    rj["floquet_estimate"] = fl.det_DP;
                    rj["floquet_gap"] = fl.gap;
                    rj["floquet_degraded"] = fl.degraded;
                    write_text_atomic(
                        out_dir / ("periodic_c" + std::to_string(ci) + "_eps" +
                                   fmt_g17(eps) + ".csv"),
                        orbit_csv(rep.periodic_path));
                }
                vr.push_back(rj);
            }
        }
        json vfile;
        vfile["model"] = bundle.model.name;
        vfile["reports"] = vr;
        write_json_atomic(out_dir / "verification.json", vfile);
    }
    res.message = "ok";
    return res;
}

} // namespace slowfast
