#pragma once

// Adaptive Dormand-Prince 5(4) with PI step control, continuous (dense)
// output per accepted step, and event location by root refinement on the
// interpolant. State dimension is a compile-time parameter.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "slowfast/errors.hpp"

namespace slowfast {

template <std::size_t N>
using State = std::array<double, N>;

struct Tolerances {
    double rel = 1e-9;
    double abs = 1e-12;
};

enum class Termination { event_hit, time_limit, step_failure };

enum class EventKind { b_crosses_level, a_crosses_level, proximity_to_point };
enum class EventDirection { up, down, either };

// Events are defined on state components: index 0 plays a, index 1 plays b
// for planar systems; higher-dimensional systems pick indices explicitly.
struct EventSpec {
    EventKind kind = EventKind::b_crosses_level;
    EventDirection direction = EventDirection::either;
    double level = 0.0;
    std::array<double, 2> point{0.0, 0.0}; // proximity_to_point target (a,b)
    std::size_t index = 1;                 // component for level crossings
    std::array<std::size_t, 2> plane{0, 1}; // components used by proximity

    static EventSpec a_level(double level, EventDirection dir,
                             std::size_t index = 0) {
        EventSpec e;
        e.kind = EventKind::a_crosses_level;
        e.direction = dir;
        e.level = level;
        e.index = index;
        return e;
    }
    static EventSpec b_level(double level, EventDirection dir,
                             std::size_t index = 1) {
        EventSpec e;
        e.kind = EventKind::b_crosses_level;
        e.direction = dir;
        e.level = level;
        e.index = index;
        return e;
    }
    static EventSpec proximity(std::array<double, 2> pt, double radius,
                               std::array<std::size_t, 2> plane = {0, 1}) {
        EventSpec e;
        e.kind = EventKind::proximity_to_point;
        e.direction = EventDirection::down;
        e.level = radius;
        e.point = pt;
        e.plane = plane;
        return e;
    }

    template <std::size_t N>
    double value(const State<N>& y) const {
        if (kind == EventKind::proximity_to_point) {
            double dx = y[plane[0]] - point[0];
            double dy = y[plane[1]] - point[1];
            return std::sqrt(dx * dx + dy * dy) - level;
        }
        return y[index] - level;
    }
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double dp_c2 = 0.2, dp_c3 = 0.3, dp_c4 = 0.8, dp_c5 = 8.0 / 9.0;
inline constexpr double dp_a21 = 0.2;
inline constexpr double dp_a31 = 3.0 / 40.0, dp_a32 = 9.0 / 40.0;
inline constexpr double dp_a41 = 44.0 / 45.0, dp_a42 = -56.0 / 15.0, dp_a43 = 32.0 / 9.0;
inline constexpr double dp_a51 = 19372.0 / 6561.0, dp_a52 = -25360.0 / 2187.0,
                        dp_a53 = 64448.0 / 6561.0, dp_a54 = -212.0 / 729.0;
inline constexpr double dp_a61 = 9017.0 / 3168.0, dp_a62 = -355.0 / 33.0,
                        dp_a63 = 46732.0 / 5247.0, dp_a64 = 49.0 / 176.0,
                        dp_a65 = -5103.0 / 18656.0;
inline constexpr double dp_a71 = 35.0 / 384.0, dp_a73 = 500.0 / 1113.0,
                        dp_a74 = 125.0 / 192.0, dp_a75 = -2187.0 / 6784.0,
                        dp_a76 = 11.0 / 84.0;
inline constexpr double dp_e1 = 71.0 / 57600.0, dp_e3 = -71.0 / 16695.0,
                        dp_e4 = 71.0 / 1920.0, dp_e5 = -17253.0 / 339200.0,
                        dp_e6 = 22.0 / 525.0, dp_e7 = -1.0 / 40.0;
// Continuous-extension coefficients (4th order interpolant).
inline constexpr double dp_d1 = -12715105075.0 / 11282082432.0,
                        dp_d3 = 87487479700.0 / 32700410799.0,
                        dp_d4 = -10690763975.0 / 1880347072.0,
                        dp_d5 = 701980252875.0 / 199316789632.0,
                        dp_d6 = -1453857185.0 / 822651844.0,
                        dp_d7 = 69997945.0 / 29380423.0;

} // namespace detail

// One accepted step's interpolant on [t0, t0+h].
template <std::size_t N>
struct DenseSegment {
    double t0 = 0.0, h = 0.0;
    State<N> r1{}, r2{}, r3{}, r4{}, r5{};

    State<N> eval(double t) const {
        double th = (t - t0) / h;
        double th1 = 1.0 - th;
        State<N> y;
        for (std::size_t d = 0; d < N; ++d)
            y[d] = r1[d] + th * (r2[d] + th1 * (r3[d] + th * (r4[d] + th1 * r5[d])));
        return y;
    }
    double t1() const { return t0 + h; }
};

template <std::size_t N>
struct OrbitPath {
    std::vector<double> t;
    std::vector<State<N>> y;
    std::vector<DenseSegment<N>> segments;
    Termination termination = Termination::time_limit;
    int event_index = -1; // which EventSpec fired, -1 if none
    double event_time = std::numeric_limits<double>::quiet_NaN();
    State<N> event_state{};
    std::string diagnostic;
    std::size_t n_accepted = 0, n_rejected = 0, n_eval = 0;

    double t_begin() const { return t.front(); }
    double t_end() const { return t.back(); }
    const State<N>& back() const { return y.back(); }

    // Interpolate at any time covered by the stored dense segments.
    State<N> interpolate(double time) const {
        if (segments.empty())
            throw DomainError("OrbitPath::interpolate: no dense segments stored");
        if (time <= segments.front().t0) return segments.front().eval(segments.front().t0);
        if (time >= segments.back().t1()) return segments.back().eval(segments.back().t1());
        std::size_t lo = 0, hi = segments.size() - 1;
        while (lo < hi) {
            std::size_t mid = (lo + hi + 1) / 2;
            if (segments[mid].t0 <= time) lo = mid; else hi = mid - 1;
        }
        return segments[lo].eval(time);
    }
};

struct IntegratorOptions {
    Tolerances tol;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0; // 0 = automatic
    std::size_t max_steps = 50'000'000;
    bool store_dense = true;       // keep per-step interpolants on the path
    std::size_t sample_stride = 1; // keep every k-th sample (first/last always)
    bool throw_on_step_failure = false;
};

// Integrates y' = rhs(t, y) from t0 to t1 (t1 > t0). Stops at the first
// triggered event, at t1, or on step failure; the path records which.
template <std::size_t N, typename Rhs>
OrbitPath<N> integrate(Rhs&& rhs, const State<N>& init, double t0, double t1,
                       const std::vector<EventSpec>& events = {},
                       const IntegratorOptions& opt = {}) {
    using namespace detail;
    static constexpr double safe = 0.9, facl = 0.2, facr = 10.0, beta = 0.04;
    const double eps = std::numeric_limits<double>::epsilon();

    if (!(t1 > t0)) throw DomainError("integrate: need t1 > t0");
    for (double v : init)
        if (!std::isfinite(v)) throw DomainError("integrate: non-finite initial state");

    OrbitPath<N> path;
    double t = t0;
    State<N> y = init;
    State<N> k1, k2, k3, k4, k5, k6, k7;

    auto eval = [&](double tt, const State<N>& yy, State<N>& out) {
        out = rhs(tt, yy);
        ++path.n_eval;
        for (double v : out)
            if (!std::isfinite(v))
                throw NumericError("integrate: non-finite rhs at t=" + std::to_string(tt));
    };

    path.t.push_back(t);
    path.y.push_back(y);

    std::vector<double> ev_val(events.size());
    eval(t, y, k1);
    for (std::size_t i = 0; i < events.size(); ++i) ev_val[i] = events[i].value(y);

    // initial step size (Hairer's heuristic)
    double h = opt.initial_step;
    if (h <= 0.0) {
        double dnf = 0.0, dny = 0.0;
        for (std::size_t d = 0; d < N; ++d) {
            double sy = opt.tol.abs + opt.tol.rel * std::abs(y[d]);
            double u = k1[d] / sy; dnf += u * u;
            u = y[d] / sy; dny += u * u;
        }
        h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
        State<N> y1e, k2e;
        for (std::size_t d = 0; d < N; ++d) y1e[d] = y[d] + h * k1[d];
        eval(t + h, y1e, k2e);
        double der2 = 0.0;
        for (std::size_t d = 0; d < N; ++d) {
            double sy = opt.tol.abs + opt.tol.rel * std::abs(y[d]);
            double u = (k2e[d] - k1[d]) / sy; der2 += u * u;
        }
        der2 = std::sqrt(der2) / h;
        double der12 = std::max(der2, std::sqrt(dnf));
        double h1 = (der12 <= 1e-15) ? std::max(1e-6, h * 1e-3)
                                     : std::pow(0.01 / der12, 0.2);
        h = std::min(100.0 * h, h1);
    }
    h = std::min(h, opt.max_step);

    double facold = 1e-4;
    std::size_t since_sample = 0;
    bool done = false;

    auto fail = [&](const std::string& why) {
        path.termination = Termination::step_failure;
        path.diagnostic = why + " at t=" + std::to_string(t);
        if (opt.throw_on_step_failure) throw NumericError(path.diagnostic);
    };

    while (!done) {
        if (path.n_accepted + path.n_rejected >= opt.max_steps) {
            fail("integrate: max step count exceeded");
            return path;
        }
        if (0.1 * h <= std::abs(t) * eps) {
            fail("integrate: step-size underflow (problem too stiff for explicit method)");
            return path;
        }
        bool last = false;
        if (t + 1.01 * h >= t1) { last = true; h = t1 - t; }

        State<N> yn, ys;
        for (std::size_t d = 0; d < N; ++d) yn[d] = y[d] + h * dp_a21 * k1[d];
        eval(t + dp_c2 * h, yn, k2);
        for (std::size_t d = 0; d < N; ++d)
            yn[d] = y[d] + h * (dp_a31 * k1[d] + dp_a32 * k2[d]);
        eval(t + dp_c3 * h, yn, k3);
        for (std::size_t d = 0; d < N; ++d)
            yn[d] = y[d] + h * (dp_a41 * k1[d] + dp_a42 * k2[d] + dp_a43 * k3[d]);
        eval(t + dp_c4 * h, yn, k4);
        for (std::size_t d = 0; d < N; ++d)
            yn[d] = y[d] + h * (dp_a51 * k1[d] + dp_a52 * k2[d] + dp_a53 * k3[d] + dp_a54 * k4[d]);
        eval(t + dp_c5 * h, yn, k5);
        for (std::size_t d = 0; d < N; ++d)
            ys[d] = yn[d] = y[d] + h * (dp_a61 * k1[d] + dp_a62 * k2[d] + dp_a63 * k3[d] +
                                        dp_a64 * k4[d] + dp_a65 * k5[d]);
        eval(t + h, yn, k6);
        for (std::size_t d = 0; d < N; ++d)
            yn[d] = y[d] + h * (dp_a71 * k1[d] + dp_a73 * k3[d] + dp_a74 * k4[d] +
                                dp_a75 * k5[d] + dp_a76 * k6[d]);
        eval(t + h, yn, k7);

        double err = 0.0;
        for (std::size_t d = 0; d < N; ++d) {
            double ee = h * (dp_e1 * k1[d] + dp_e3 * k3[d] + dp_e4 * k4[d] +
                             dp_e5 * k5[d] + dp_e6 * k6[d] + dp_e7 * k7[d]);
            double sy = opt.tol.abs +
                        opt.tol.rel * std::max(std::abs(y[d]), std::abs(yn[d]));
            double u = ee / sy;
            err += u * u;
        }
        err = std::sqrt(err / N);

        double fac11 = std::pow(err, 0.2 - beta * 0.75);
        double fac = fac11 / std::pow(facold, beta);
        fac = std::max(1.0 / facr, std::min(1.0 / facl, fac / safe));
        double h_new = h / fac;

        if (err > 1.0) {
            h /= std::min(1.0 / facl, fac11 / safe);
            ++path.n_rejected;
            continue;
        }

        // accepted: build the interpolant for this step
        DenseSegment<N> seg;
        seg.t0 = t;
        seg.h = h;
        for (std::size_t d = 0; d < N; ++d) {
            double dy = yn[d] - y[d];
            double bspl = h * k1[d] - dy;
            seg.r1[d] = y[d];
            seg.r2[d] = dy;
            seg.r3[d] = bspl;
            seg.r4[d] = dy - h * k7[d] - bspl;
            seg.r5[d] = h * (dp_d1 * k1[d] + dp_d3 * k3[d] + dp_d4 * k4[d] +
                             dp_d5 * k5[d] + dp_d6 * k6[d] + dp_d7 * k7[d]);
        }

        // event detection on this step
        int hit = -1;
        double t_hit = t + h;
        for (std::size_t i = 0; i < events.size(); ++i) {
            double v0 = ev_val[i];
            double v1 = events[i].value(yn);
            bool trig = false;
            switch (events[i].direction) {
                case EventDirection::up: trig = (v0 < 0.0 && v1 >= 0.0); break;
                case EventDirection::down: trig = (v0 > 0.0 && v1 <= 0.0); break;
                case EventDirection::either:
                    trig = (v0 < 0.0 && v1 >= 0.0) || (v0 > 0.0 && v1 <= 0.0);
                    break;
            }
            if (!trig) continue;
            // refine the crossing time on the interpolant (bisection: the
            // event value need not be monotone inside the step)
            double ta = t, tb = t + h, va = v0;
            for (int it = 0; it < 200 && (tb - ta) > 1e-12 * std::max(1.0, std::abs(tb)); ++it) {
                double tm = 0.5 * (ta + tb);
                double vm = events[i].value(seg.eval(tm));
                if ((vm >= 0.0) == (va >= 0.0)) { ta = tm; va = vm; }
                else tb = tm;
            }
            double tc = tb; // first time the event-side sign holds
            if (tc < t_hit) { t_hit = tc; hit = static_cast<int>(i); }
        }

        if (hit >= 0) {
            State<N> ye = seg.eval(t_hit);
            path.t.push_back(t_hit);
            path.y.push_back(ye);
            if (opt.store_dense) {
                seg.h = t_hit - seg.t0; // clip the last interpolant
                if (seg.h > 0.0) path.segments.push_back(seg);
            }
            path.termination = Termination::event_hit;
            path.event_index = hit;
            path.event_time = t_hit;
            path.event_state = ye;
            ++path.n_accepted;
            return path;
        }

        facold = std::max(err, 1e-4);
        t += h;
        y = yn;
        k1 = k7; // FSAL
        for (std::size_t i = 0; i < events.size(); ++i) ev_val[i] = events[i].value(y);
        ++path.n_accepted;

        if (opt.store_dense) path.segments.push_back(seg);
        ++since_sample;
        if (last || since_sample >= opt.sample_stride) {
            path.t.push_back(t);
            path.y.push_back(y);
            since_sample = 0;
        }
        if (last) {
            path.termination = Termination::time_limit;
            done = true;
        }
        h = std::min(h_new, opt.max_step);
    }
    return path;
}

} // namespace slowfast
