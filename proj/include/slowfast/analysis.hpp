#pragma once

// Scans chi over the heteroclinic family, refines sign-change brackets to
// roots, classifies candidates by the sign of lambda, and predicts periods.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <future>
#include <string>
#include <vector>

#include "slowfast/characteristics.hpp"
#include "slowfast/errors.hpp"
#include "slowfast/heteroclinic.hpp"
#include "slowfast/quadrature.hpp"
#include "slowfast/rootfind.hpp"

namespace slowfast {

// Maps a family parameter s to its heteroclinic orbit. For most models
// s == a_alpha; the chemostat parameterizes by the crossing x0 instead.
using OrbitProvider = std::function<HeteroclinicOrbit(double s)>;

struct ScanPoint {
    double s = 0.0;
    bool ok = false;
    std::string error;
    CharacteristicValues vals;
};

inline std::size_t worker_count() {
    if (const char* env = std::getenv("SLOWFAST_WORKERS")) {
        long n = std::strtol(env, nullptr, 10);
        if (n >= 1) return static_cast<std::size_t>(n);
    }
    return 1;
}

inline std::vector<ScanPoint> scan_chi(const SlowFastModel& m,
                                       const OrbitProvider& family,
                                       double s_lo, double s_hi,
                                       std::size_t n_grid) {
    if (!(s_hi > s_lo)) throw DomainError("scan_chi: empty window");
    if (n_grid < 8) throw DomainError("scan_chi: n_grid must be >= 8");
    std::vector<ScanPoint> out(n_grid);
    auto eval_one = [&](std::size_t i) {
        double s = s_lo + (s_hi - s_lo) * (double(i) + 0.5) / double(n_grid);
        ScanPoint p;
        p.s = s;
        try {
            auto orbit = family(s);
            p.vals = evaluate_characteristics(m, orbit);
            p.ok = true;
        } catch (const Error& e) {
            p.error = e.what();
        }
        out[i] = p;
    };
    std::size_t workers = std::min(worker_count(), n_grid);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n_grid; ++i) eval_one(i);
    } else {
        std::vector<std::future<void>> fs;
        for (std::size_t w = 0; w < workers; ++w)
            fs.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t i = w; i < n_grid; i += workers) eval_one(i);
            }));
        for (auto& f : fs) f.get();
    }
    bool any_ok = false;
    for (const auto& p : out) any_ok |= p.ok;
    if (!any_ok)
        throw NumericError("scan_chi: heteroclinic computation failed across the "
                           "entire window; first error: " + out.front().error);
    return out;
}

enum class Stability { stable, unstable, degenerate };

inline const char* to_string(Stability s) {
    switch (s) {
        case Stability::stable: return "stable";
        case Stability::unstable: return "unstable";
        case Stability::degenerate: return "degenerate";
    }
    return "?";
}

struct CycleCandidate {
    double s0 = 0.0;
    CharacteristicValues vals;
    double lambda0 = 0.0;
    Stability stability = Stability::degenerate;
    HeteroclinicOrbit gamma;
    double predicted_period_coeff = 0.0; // int da / f(a,0,0) over [a_omega, a_alpha]
    double chi_prime = 0.0;              // finite-difference diagnostic only
    double bracket_lo = 0.0, bracket_hi = 0.0;
};

struct AnalysisOptions {
    double root_tol = 0.0;   // 0 = auto: 1e-8 * max |chi| over the scan
    double lambda_tol = 0.0; // 0 = auto: 1e-4 + 3 * lambda_err at the root
};

struct CandidateSet {
    std::vector<CycleCandidate> candidates;
    std::vector<std::string> warnings;
};

inline double period_coefficient(const SlowFastModel& m, const HeteroclinicOrbit& orbit) {
    auto q = adaptive_quad([&](double a) { return 1.0 / m.f(a, 0.0, 0.0); },
                           orbit.a_omega, orbit.a_alpha, 1e-12, 1e-14);
    return q.value;
}

inline CandidateSet find_candidates(const SlowFastModel& m,
                                    const OrbitProvider& family,
                                    const std::vector<ScanPoint>& scan,
                                    AnalysisOptions opt = {}) {
    CandidateSet out;
    double chi_scale = 0.0, max_err = 0.0;
    std::size_t n_ok = 0;
    for (const auto& p : scan) {
        if (!p.ok) continue;
        ++n_ok;
        chi_scale = std::max(chi_scale, std::abs(p.vals.chi));
        max_err = std::max(max_err, p.vals.chi_err);
    }
    if (n_ok < 2) {
        out.warnings.push_back("scan too sparse: fewer than two valid points");
        return out;
    }
    // a window where chi sits inside its own error band everywhere is
    // degenerate: no classification is possible (symmetric models)
    if (chi_scale <= 10.0 * std::max(max_err, 1e-300)) {
        out.warnings.push_back(
            "degenerate scan: |chi| never exceeds 10x its error estimate; "
            "chi is indistinguishable from zero on this window, no candidates "
            "classified");
        return out;
    }
    double root_tol = opt.root_tol > 0.0 ? opt.root_tol : 1e-8 * chi_scale;

    auto chi_at = [&](double s) -> double {
        auto orbit = family(s);
        auto [c, e] = chi_endpoint(m, orbit);
        (void)e;
        return c;
    };

    const ScanPoint* prev = nullptr;
    for (const auto& p : scan) {
        if (!p.ok) { prev = nullptr; continue; }
        if (prev && prev->vals.chi != 0.0 &&
            (prev->vals.chi > 0.0) != (p.vals.chi >= 0.0)) {
            // refine the bracket
            double lo = prev->s, hi = p.s;
            RootResult r;
            try {
                r = brent(chi_at, lo, hi, 1e-12 * std::max(1.0, std::abs(hi)), root_tol);
            } catch (const Error& e) {
                out.warnings.push_back("root refinement failed on bracket [" +
                                       std::to_string(lo) + "," + std::to_string(hi) +
                                       "]: " + e.what());
                prev = &p;
                continue;
            }
            if (!r.converged) {
                out.warnings.push_back("root refinement did not converge on bracket [" +
                                       std::to_string(lo) + "," + std::to_string(hi) + "]");
                prev = &p;
                continue;
            }
            CycleCandidate c;
            c.s0 = r.x;
            c.bracket_lo = lo;
            c.bracket_hi = hi;
            c.gamma = family(r.x);
            c.vals = evaluate_characteristics(m, c.gamma);
            c.lambda0 = c.vals.lambda;
            c.predicted_period_coeff = period_coefficient(m, c.gamma);
            double ds = 1e-3 * (hi - lo);
            try {
                c.chi_prime = (chi_at(r.x + ds) - chi_at(r.x - ds)) / (2.0 * ds);
            } catch (const Error&) {
                c.chi_prime = std::numeric_limits<double>::quiet_NaN();
            }
            double ltol = opt.lambda_tol > 0.0 ? opt.lambda_tol
                                               : 1e-4 + 3.0 * c.vals.lambda_err;
            if (c.lambda0 < -ltol) c.stability = Stability::stable;
            else if (c.lambda0 > ltol) c.stability = Stability::unstable;
            else {
                c.stability = Stability::degenerate;
                out.warnings.push_back(
                    "candidate at s0=" + std::to_string(c.s0) +
                    " has lambda within tolerance of zero; existence of a nearby "
                    "periodic orbit is not guaranteed");
            }
            out.candidates.push_back(std::move(c));
        }
        prev = &p;
    }
    std::sort(out.candidates.begin(), out.candidates.end(),
              [](const CycleCandidate& x, const CycleCandidate& y) { return x.s0 < y.s0; });
    return out;
}

inline double predicted_period(const CycleCandidate& c, double eps) {
    if (!(eps > 0.0)) throw DomainError("predicted_period: eps must be positive");
    if (c.stability == Stability::degenerate)
        throw DomainError("predicted_period: degenerate candidate");
    return c.predicted_period_coeff / eps;
}

} // namespace slowfast
