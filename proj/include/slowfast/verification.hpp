#pragma once

// Direct checks of the predictions on the full eps > 0 planar system:
// Poincare return maps on the section {b = delta1, b increasing}, periodic
// orbit location, the entry-exit relation, and the Floquet identity
// det(DP) = exp(lambda).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "slowfast/analysis.hpp"
#include "slowfast/errors.hpp"
#include "slowfast/integrator.hpp"
#include "slowfast/model.hpp"
#include "slowfast/rootfind.hpp"

namespace slowfast {

inline auto full_rhs(const SlowFastModel& m, double eps) {
    return [&m, eps](double, const State<2>& y) -> State<2> {
        double a = y[0], b = y[1];
        return {eps * m.f(a, b, eps) + b * m.h(a, b, eps), b * m.g(a, b, eps)};
    };
}

// Same flow in (a, w = ln b). During the slow passage b drops like
// exp(-K/eps), far below both double range and any absolute tolerance, so
// every quantitative check of the full system integrates in log form. The
// exp is clamped: an overlong trial step whose stage lands past the fast
// excursion then produces a huge (finite) error estimate and gets rejected
// instead of overflowing.
inline auto full_rhs_log(const SlowFastModel& m, double eps) {
    return [&m, eps](double, const State<2>& y) -> State<2> {
        double a = y[0], b = std::exp(std::min(y[1], 700.0));
        return {eps * m.f(a, b, eps) + b * m.h(a, b, eps), m.g(a, b, eps)};
    };
}

struct VerifyOptions {
    double delta1 = 0.0; // 0 = auto: 5% of the candidate orbit's peak b
    Tolerances tol{1e-9, 1e-12};
    double t_max_factor = 50.0; // integration cap = factor / eps
    int max_iterations = 40;
    double fixed_point_tol = 0.0; // 0 = auto
    std::size_t sample_stride = 8;
    // step cap for the log-form integrations: the slow passage is locally
    // linear in ln b, so without a cap the step grows until a stage lands
    // past the fast excursion
    double max_step = 1.0;
};

struct ReturnResult {
    double a_out = std::numeric_limits<double>::quiet_NaN();
    double transit_time = std::numeric_limits<double>::quiet_NaN();
    bool ok = false;
    std::string diagnostic;
};

// First return to the section {b = delta1, db/dt > 0}. The start point
// (a_in, delta1) sits on the section; direction filtering keeps the event
// from firing until the orbit has gone below and comes back up.
inline ReturnResult return_map(const SlowFastModel& m, double eps, double delta1,
                               double a_in, const VerifyOptions& opt = {}) {
    ReturnResult res;
    std::vector<EventSpec> events{
        EventSpec::b_level(std::log(delta1), EventDirection::up, 1)};
    IntegratorOptions io;
    io.tol = opt.tol;
    io.store_dense = false;
    io.sample_stride = 1u << 20; // keep memory flat on long runs
    io.max_step = opt.max_step;
    double t_max = opt.t_max_factor / eps;
    OrbitPath<2> path;
    try {
        path = integrate<2>(full_rhs_log(m, eps),
                            State<2>{a_in, std::log(delta1)}, 0.0, t_max,
                            events, io);
    } catch (const Error& e) {
        res.diagnostic = e.what();
        return res;
    }
    if (path.termination == Termination::step_failure) {
        res.diagnostic = path.diagnostic;
        return res;
    }
    if (path.termination != Termination::event_hit) {
        res.diagnostic = "no return to the section within t_max (non-recurrent)";
        return res;
    }
    res.a_out = path.event_state[0];
    res.transit_time = path.event_time;
    res.ok = true;
    return res;
}

struct VerificationReport {
    double epsilon = 0.0;
    double candidate_s0 = 0.0;
    double delta1 = 0.0;
    double fixed_point_a = std::numeric_limits<double>::quiet_NaN();
    double measured_period = std::numeric_limits<double>::quiet_NaN();
    double predicted_period = std::numeric_limits<double>::quiet_NaN();
    double orbit_distance = std::numeric_limits<double>::quiet_NaN();
    double floquet_estimate = std::numeric_limits<double>::quiet_NaN();
    double exp_lambda = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    bool floquet_degraded = false;
    int iterations = 0;
    std::string diagnostic;
    OrbitPath<2> periodic_path; // one period from the fixed point
};

// a-coordinate where the candidate's fast orbit crosses b = delta1 on the
// way up (near the alpha end).
inline double section_seed(const HeteroclinicOrbit& orbit, double delta1) {
    const auto& ys = orbit.path.y;
    for (std::size_t i = 1; i < ys.size(); ++i) {
        if (ys[i - 1][1] < delta1 && ys[i][1] >= delta1 &&
            ys[i][1] > ys[i - 1][1]) {
            double w = (delta1 - ys[i - 1][1]) / (ys[i][1] - ys[i - 1][1]);
            return ys[i - 1][0] + w * (ys[i][0] - ys[i - 1][0]);
        }
    }
    throw DomainError("section_seed: orbit never crosses b = delta1 upward");
}

// Max over the points of `orbit` of the distance to the polyline through
// `ref` closed by the a-axis segment between its endpoints.
inline double distance_to_singular_cycle(const std::vector<State<2>>& pts,
                                         const HeteroclinicOrbit& gamma) {
    std::vector<State<2>> poly;
    const auto& g = gamma.path.y;
    std::size_t stride = std::max<std::size_t>(1, g.size() / 2000);
    for (std::size_t i = 0; i < g.size(); i += stride) poly.push_back(g[i]);
    if (poly.back() != g.back()) poly.push_back(g.back());
    // close the loop along the equilibrium line sigma(s)
    poly.push_back({gamma.a_omega, 0.0});
    poly.push_back({gamma.a_alpha, 0.0});
    poly.push_back(poly.front());

    auto seg_dist = [](const State<2>& p, const State<2>& q1, const State<2>& q2) {
        double vx = q2[0] - q1[0], vy = q2[1] - q1[1];
        double wx = p[0] - q1[0], wy = p[1] - q1[1];
        double vv = vx * vx + vy * vy;
        double t = vv > 0.0 ? std::clamp((wx * vx + wy * vy) / vv, 0.0, 1.0) : 0.0;
        double dx = wx - t * vx, dy = wy - t * vy;
        return std::sqrt(dx * dx + dy * dy);
    };
    double worst = 0.0;
    std::size_t pstride = std::max<std::size_t>(1, pts.size() / 2000);
    for (std::size_t i = 0; i < pts.size(); i += pstride) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 1; j < poly.size(); ++j)
            best = std::min(best, seg_dist(pts[i], poly[j - 1], poly[j]));
        worst = std::max(worst, best);
    }
    return worst;
}

inline VerificationReport find_periodic_orbit(const SlowFastModel& m, double eps,
                                              const CycleCandidate& cand,
                                              VerifyOptions opt = {}) {
    if (cand.stability == Stability::degenerate)
        throw DomainError("find_periodic_orbit: degenerate candidate");
    VerificationReport rep;
    rep.epsilon = eps;
    rep.candidate_s0 = cand.s0;
    if (opt.delta1 <= 0.0) opt.delta1 = 0.05 * cand.gamma.peak_b;
    rep.delta1 = opt.delta1;
    rep.exp_lambda = std::exp(cand.lambda0);
    rep.predicted_period = cand.predicted_period_coeff / eps;

    double a_seed = section_seed(cand.gamma, opt.delta1);
    double scale = std::abs(cand.gamma.a_alpha - cand.gamma.a_omega);
    double tol_a = opt.fixed_point_tol > 0.0 ? opt.fixed_point_tol : 1e-9 * scale;
    double max_step = 0.25 * scale;

    // damped secant on phi(a) = R(a) - a; works on both sides of stability
    // (forward iteration of an expanding map would diverge)
    double last_period = std::numeric_limits<double>::quiet_NaN();
    auto phi = [&](double a) -> double {
        auto r = return_map(m, eps, opt.delta1, a, opt);
        if (!r.ok) throw NumericError("return map failed at a=" + std::to_string(a) +
                                      ": " + r.diagnostic);
        last_period = r.transit_time;
        return r.a_out - a;
    };
    double a0 = a_seed, f0, a1, f1;
    try {
        f0 = phi(a0);
        a1 = a0 + std::clamp(0.5 * f0, -0.05 * scale, 0.05 * scale);
        if (a1 == a0) a1 = a0 + 1e-7 * scale;
        f1 = phi(a1);
        rep.iterations = 2;
        while (rep.iterations < opt.max_iterations) {
            if (std::abs(f1) <= tol_a) break;
            double denom = f1 - f0;
            double step = (denom != 0.0) ? -f1 * (a1 - a0) / denom : 0.5 * tol_a;
            step = std::clamp(step, -max_step, max_step);
            a0 = a1; f0 = f1;
            a1 = a1 + step;
            f1 = phi(a1);
            ++rep.iterations;
            if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(a1))) break;
        }
    } catch (const Error& e) {
        rep.diagnostic = e.what();
        return rep;
    }
    if (std::abs(f1) > 10.0 * tol_a) {
        rep.diagnostic = "secant iteration did not reach the fixed-point tolerance "
                         "(|R(a)-a| = " + std::to_string(std::abs(f1)) + ")";
        rep.fixed_point_a = a1;
        rep.measured_period = last_period;
        return rep;
    }
    rep.fixed_point_a = a1;
    rep.measured_period = last_period;
    rep.converged = true;

    // one full period with dense sampling for the distance-to-cycle metric
    IntegratorOptions io;
    io.tol = opt.tol;
    io.store_dense = false;
    io.sample_stride = opt.sample_stride;
    io.max_step = opt.max_step;
    try {
        rep.periodic_path = integrate<2>(full_rhs_log(m, eps),
                                         State<2>{a1, std::log(opt.delta1)},
                                         0.0, rep.measured_period, {}, io);
        for (auto& pt : rep.periodic_path.y) pt[1] = std::exp(pt[1]);
        rep.orbit_distance = distance_to_singular_cycle(rep.periodic_path.y, cand.gamma);
    } catch (const Error& e) {
        rep.diagnostic = std::string("periodic path re-integration failed: ") + e.what();
    }
    return rep;
}

struct FloquetResult {
    double det_DP = std::numeric_limits<double>::quiet_NaN();
    double exp_lambda = std::numeric_limits<double>::quiet_NaN();
    double gap = std::numeric_limits<double>::quiet_NaN();
    bool degraded = false;
    std::string diagnostic;
};

inline FloquetResult floquet_check(const SlowFastModel& m, double eps,
                                   const CycleCandidate& cand,
                                   const VerificationReport& rep,
                                   VerifyOptions opt = {}) {
    if (!rep.converged)
        throw DomainError("floquet_check: verification report not converged");
    if (opt.delta1 <= 0.0) opt.delta1 = rep.delta1;
    FloquetResult out;
    out.exp_lambda = std::exp(cand.lambda0);
    double d = std::max(1e-6, 1e-3 * std::abs(rep.fixed_point_a - cand.gamma.a_omega));
    auto rp = return_map(m, eps, opt.delta1, rep.fixed_point_a + d, opt);
    auto rm = return_map(m, eps, opt.delta1, rep.fixed_point_a - d, opt);
    if (!rp.ok || !rm.ok) {
        out.degraded = true;
        out.diagnostic = "finite-difference step left the recurrent region: " +
                         (rp.ok ? rm.diagnostic : rp.diagnostic);
        return out;
    }
    out.det_DP = (rp.a_out - rm.a_out) / (2.0 * d);
    out.gap = std::abs(out.det_DP - out.exp_lambda);
    return out;
}

struct EntryExitResult {
    double a_exit_predicted = std::numeric_limits<double>::quiet_NaN();
    double a_exit_measured = std::numeric_limits<double>::quiet_NaN();
    double gap = std::numeric_limits<double>::quiet_NaN();
};

// Entry-exit relation on the equilibrium line: a trajectory entering at
// (a_entry, delta1) with g(a_entry) < 0 leaves near the a_exit where the
// partial integral of g/f from a_entry vanishes.
inline EntryExitResult entry_exit_check(const SlowFastModel& m, double eps,
                                        double a_entry, double delta1,
                                        const VerifyOptions& opt = {}) {
    if (!(m.g(a_entry, 0.0, 0.0) < 0.0))
        throw DomainError("entry_exit_check: a_entry must lie on the attracting side");
    EntryExitResult res;

    auto partial = [&](double a_exit) {
        return adaptive_quad([&](double a) {
                   return m.g(a, 0.0, 0.0) / m.f(a, 0.0, 0.0);
               }, a_entry, a_exit, 1e-12, 1e-14).value;
    };
    // bracket the exit right of a_bar and solve the vanishing integral
    double span = std::max(1.0, std::abs(m.a_bar - a_entry));
    double lo = m.a_bar + 1e-9 * span;
    double hi = m.a_bar + span;
    double cap = std::isfinite(m.a_max) ? m.a_max - 1e-9 * span
                                        : m.a_bar + 1e6 * span;
    while (partial(hi) < 0.0 && hi < cap)
        hi = std::min(cap, m.a_bar + 2.0 * (hi - m.a_bar));
    if (partial(hi) < 0.0)
        throw NumericError("entry_exit_check: partial integral never vanishes in window");
    res.a_exit_predicted = brent(partial, lo, hi, 1e-12 * span).x;

    // measure in (a, w = ln b): during the slow passage b falls like
    // exp(-K/eps), far below double range for small eps, while w stays O(1/eps)
    auto log_rhs = [&m, eps](double, const State<2>& y) -> State<2> {
        double a = y[0], b = std::exp(y[1]);
        return {eps * m.f(a, b, eps) + b * m.h(a, b, eps), m.g(a, b, eps)};
    };
    std::vector<EventSpec> events{
        EventSpec::b_level(std::log(delta1), EventDirection::up, 1)};
    IntegratorOptions io;
    io.tol = opt.tol;
    io.store_dense = false;
    io.sample_stride = 1u << 20;
    // the passage phase is locally linear in w, so unrestricted steps grow
    // until a stage lands beyond the excursion and exp(w) overflows
    io.max_step = 1.0;
    auto path = integrate<2>(log_rhs, State<2>{a_entry, std::log(delta1)}, 0.0,
                             opt.t_max_factor / eps, events, io);
    if (path.termination != Termination::event_hit)
        throw NumericError("entry_exit_check: no exit within the time window");
    res.a_exit_measured = path.event_state[0];
    res.gap = std::abs(res.a_exit_measured - res.a_exit_predicted);
    return res;
}

} // namespace slowfast
