#pragma once

// Heteroclinic orbits of the limiting (fast) system
//   a' = b*h(a,b,0),   b' = b*g(a,b,0),
// which has the a-axis as a line of equilibria. An orbit leaves (a_alpha, 0)
// on the repelling side (g > 0), rises, falls, and lands at (a_omega, 0) on
// the attracting side (g < 0). We seed along the exact eigenvector of the
// degenerate Jacobian and close the truncated tails with a first-order
// correction.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "slowfast/errors.hpp"
#include "slowfast/integrator.hpp"
#include "slowfast/model.hpp"

namespace slowfast {

struct HeteroclinicOrbit {
    double s = 0.0; // family parameter (a_alpha unless the model overrides)
    double a_alpha = 0.0;
    double a_omega = 0.0;
    OrbitPath<2> path;
    double seed_offset = 0.0;     // delta actually used
    double tail_cut = 0.0;        // b_stop actually used
    double tail_correction = 0.0; // first-order a-drift below b_stop (omega end)
    double peak_b = 0.0;
};

struct HetOptions {
    double delta = 0.0;  // 0 = auto: 1e-8 * pilot b-scale
    double b_stop = 0.0; // 0 = auto: 1e-7 * pilot b-scale
    Tolerances tol{1e-9, 1e-12};
    double t_max = 1e9;
    double a_window_lo = -std::numeric_limits<double>::infinity();
    double a_window_hi = std::numeric_limits<double>::infinity();
    std::size_t sample_stride = 1;
};

// Eigenvector of the fast-system Jacobian [[0, h],[0, g]] at (a, 0) for the
// nonzero eigenvalue g: proportional to (h/g, 1), normalized with b > 0.
inline std::array<double, 2> unstable_direction(const SlowFastModel& m, double a) {
    double gv = m.g(a, 0.0, 0.0);
    if (!(gv > 0.0))
        throw DomainError("unstable_direction: g(a,0,0) <= 0 at a=" + std::to_string(a));
    double hv = m.h(a, 0.0, 0.0);
    double v0 = hv / gv, v1 = 1.0;
    double n = std::sqrt(v0 * v0 + v1 * v1);
    return {v0 / n, v1 / n};
}

// Same eigenvector formula on the attracting side (g < 0): the direction of
// the strong stable manifold, used for reversal checks.
inline std::array<double, 2> stable_direction(const SlowFastModel& m, double a) {
    double gv = m.g(a, 0.0, 0.0);
    if (!(gv < 0.0))
        throw DomainError("stable_direction: g(a,0,0) >= 0 at a=" + std::to_string(a));
    double hv = m.h(a, 0.0, 0.0);
    double v0 = hv / gv, v1 = 1.0;
    double n = std::sqrt(v0 * v0 + v1 * v1);
    return {v0 / n, v1 / n};
}

namespace detail {

template <bool Reverse>
inline auto fast_rhs(const SlowFastModel& m) {
    return [&m](double, const State<2>& y) -> State<2> {
        double a = y[0], b = y[1];
        double da = b * m.h(a, b, 0.0);
        double db = b * m.g(a, b, 0.0);
        if constexpr (Reverse) return {-da, -db};
        else return {da, db};
    };
}

// Drift in a accumulated between b_end and the axis, to first order:
// da/db = h/g, so the remaining tail contributes -b_end * h/g.
inline double tail_drift(const SlowFastModel& m, double a_end, double b_end) {
    double gv = m.g(a_end, b_end, 0.0);
    double hv = m.h(a_end, b_end, 0.0);
    if (gv == 0.0) throw NumericError("tail correction: g vanishes at orbit end");
    return -b_end * hv / gv;
}

} // namespace detail

template <bool Reverse = false>
OrbitPath<2> integrate_fast(const SlowFastModel& m, const State<2>& init,
                            double b_stop, const HetOptions& opt) {
    std::vector<EventSpec> events;
    events.push_back(EventSpec::b_level(b_stop, EventDirection::down));
    if (std::isfinite(opt.a_window_lo))
        events.push_back(EventSpec::a_level(opt.a_window_lo, EventDirection::down));
    if (std::isfinite(opt.a_window_hi))
        events.push_back(EventSpec::a_level(opt.a_window_hi, EventDirection::up));
    IntegratorOptions io;
    io.tol = opt.tol;
    io.sample_stride = opt.sample_stride;
    auto path = Reverse
        ? integrate<2>(detail::fast_rhs<true>(m), init, 0.0, opt.t_max, events, io)
        : integrate<2>(detail::fast_rhs<false>(m), init, 0.0, opt.t_max, events, io);
    return path;
}

inline HeteroclinicOrbit compute_heteroclinic(const SlowFastModel& m, double a_alpha,
                                              HetOptions opt = {}) {
    if (!(a_alpha > m.a_bar) || !(a_alpha < m.a_max))
        throw DomainError("compute_heteroclinic: a_alpha not in (a_bar, a_max)");
    if (!std::isfinite(opt.a_window_lo))
        opt.a_window_lo = std::isfinite(m.a_min)
            ? m.a_min
            : m.a_bar - 1e3 * std::max(1.0, std::abs(a_alpha - m.a_bar));
    if (!std::isfinite(opt.a_window_hi))
        opt.a_window_hi = std::isfinite(m.a_max)
            ? m.a_max
            : a_alpha + 1e3 * std::max(1.0, std::abs(a_alpha - m.a_bar));

    auto v = unstable_direction(m, a_alpha);

    // pilot run with coarse settings to estimate the b scale of the orbit
    if (opt.delta <= 0.0 || opt.b_stop <= 0.0) {
        double rough = 1e-6 * std::max(1.0, std::abs(a_alpha - m.a_bar));
        HetOptions pilot = opt;
        pilot.tol = {1e-6, 1e-9};
        pilot.sample_stride = 16;
        State<2> y0{a_alpha + rough * v[0], rough * v[1]};
        auto p = integrate_fast<false>(m, y0, 10.0 * rough, pilot);
        double scale = 0.0;
        for (const auto& y : p.y) scale = std::max(scale, y[1]);
        if (!(scale > 0.0))
            throw NumericError("compute_heteroclinic: pilot run found no excursion");
        if (opt.delta <= 0.0) opt.delta = 1e-8 * scale;
        if (opt.b_stop <= 0.0) opt.b_stop = 1e-7 * scale;
    }

    State<2> y0{a_alpha + opt.delta * v[0], opt.delta * v[1]};
    auto path = integrate_fast<false>(m, y0, opt.b_stop, opt);
    if (path.termination == Termination::step_failure)
        throw NumericError("compute_heteroclinic: " + path.diagnostic);
    if (path.termination != Termination::event_hit || path.event_index != 0)
        throw NumericError("compute_heteroclinic: no heteroclinic connection in "
                           "window (orbit left the a-window or hit the time limit) "
                           "for a_alpha=" + std::to_string(a_alpha));
    double a_end = path.back()[0], b_end = path.back()[1];
    if (!(m.g(a_end, 0.0, 0.0) < 0.0))
        throw NumericError("compute_heteroclinic: orbit landed on the repelling side");

    HeteroclinicOrbit orbit;
    orbit.s = a_alpha;
    orbit.a_alpha = a_alpha;
    orbit.seed_offset = opt.delta;
    orbit.tail_cut = opt.b_stop;
    orbit.tail_correction = detail::tail_drift(m, a_end, b_end);
    orbit.a_omega = a_end + orbit.tail_correction;
    for (const auto& y : path.y) orbit.peak_b = std::max(orbit.peak_b, y[1]);
    orbit.path = std::move(path);
    return orbit;
}

// Backward-time run from the omega side; recovers a_alpha. Used by the
// reversal-consistency checks.
inline double recover_alpha_backward(const SlowFastModel& m, double a_omega,
                                     HetOptions opt = {}) {
    if (!(a_omega < m.a_bar))
        throw DomainError("recover_alpha_backward: a_omega not left of a_bar");
    if (opt.delta <= 0.0) opt.delta = 1e-8 * std::max(1.0, std::abs(a_omega - m.a_bar));
    if (opt.b_stop <= 0.0) opt.b_stop = 10.0 * opt.delta;
    if (!std::isfinite(opt.a_window_lo))
        opt.a_window_lo = a_omega - 1.0;
    if (!std::isfinite(opt.a_window_hi))
        opt.a_window_hi = std::isfinite(m.a_max)
            ? m.a_max
            : m.a_bar + 1e3 * std::max(1.0, std::abs(a_omega - m.a_bar));
    auto v = stable_direction(m, a_omega);
    State<2> y0{a_omega + opt.delta * v[0], opt.delta * v[1]};
    auto path = integrate_fast<true>(m, y0, opt.b_stop, opt);
    if (path.termination != Termination::event_hit || path.event_index != 0)
        throw NumericError("recover_alpha_backward: no connection found");
    double a_end = path.back()[0], b_end = path.back()[1];
    return a_end + detail::tail_drift(m, a_end, b_end);
}

struct OmegaEntry {
    double a_alpha = 0.0;
    double a_omega = std::numeric_limits<double>::quiet_NaN();
    double peak_b = 0.0;
    bool ok = false;
    std::string error;
};

struct OmegaMap {
    std::vector<OmegaEntry> entries;
    bool monotone = true; // a_omega decreasing as a_alpha increases
};

inline OmegaMap omega_map(const SlowFastModel& m, const std::vector<double>& a_grid,
                          const HetOptions& opt = {}) {
    if (a_grid.empty()) throw DomainError("omega_map: empty grid");
    OmegaMap out;
    out.entries.reserve(a_grid.size());
    for (double a : a_grid) {
        OmegaEntry e;
        e.a_alpha = a;
        try {
            HetOptions o = opt;
            o.sample_stride = std::max<std::size_t>(o.sample_stride, 4);
            auto orb = compute_heteroclinic(m, a, o);
            e.a_omega = orb.a_omega;
            e.peak_b = orb.peak_b;
            e.ok = true;
        } catch (const Error& err) {
            e.error = err.what();
        }
        out.entries.push_back(e);
    }
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& e : out.entries) {
        if (!e.ok) continue;
        if (e.a_omega > prev) out.monotone = false;
        prev = e.a_omega;
    }
    return out;
}

// Sanity check on the b-profile: one rise, one fall (b' = b*g changes sign
// once along the orbit). Tolerates integrator-level wiggles near the peak.
inline bool single_peaked(const HeteroclinicOrbit& orbit, double rel_tol = 1e-9) {
    const auto& ys = orbit.path.y;
    double tol = rel_tol * orbit.peak_b;
    int phase = 0; // 0 rising, 1 falling
    for (std::size_t i = 1; i < ys.size(); ++i) {
        double db = ys[i][1] - ys[i - 1][1];
        if (phase == 0 && db < -tol) phase = 1;
        else if (phase == 1 && db > tol) return false;
    }
    return phase == 1;
}

} // namespace slowfast
