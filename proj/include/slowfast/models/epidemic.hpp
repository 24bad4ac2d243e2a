#pragma once

// SIR-type epidemic model in (S, I, N) form:
//   S' = D*N + eps*f(N) - g(S,N)*I - (D+p)*S
//   I' = (g(S,N) - a)*I,          a = d + gamma + alpha
//   N' = eps*f(N) - alpha*I
// with saturating incidence g(S,N) = beta*S/(m+S). The equilibrium line of
// the eps=0 system is Z0 = {I=0, S = D/(D+p)*N}; its center manifold
// S = S~(I,N) is constructed numerically from a fan of limiting-system
// orbits, and the planar restriction
//   I' = (g(S~(I,N),N) - a)*I,   N' = eps*f(N) - alpha*I
// is a slow-fast system with (N, I) in the role of (a, b) and a_bar = N0.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "slowfast/errors.hpp"
#include "slowfast/heteroclinic.hpp"
#include "slowfast/integrator.hpp"
#include "slowfast/model.hpp"
#include "slowfast/quadrature.hpp"
#include "slowfast/rootfind.hpp"

namespace slowfast {

enum class EpidemicProfile { logistic, deformed };

struct EpidemicParams {
    double D = 0.2;         // inflow/death rate
    double p = 0.01;        // vaccination rate
    double alpha = 0.048;   // disease-induced death rate
    double beta = 1.0;      // incidence scale
    double gamma_rec = 0.75; // recovery rate
    double m_sat = 0.1;     // incidence half-saturation
    double d = 0.2;         // natural death rate of infectives
    double N_max = 400.0;
    double r = 1.0;         // logistic rate in the slow drift
    EpidemicProfile profile = EpidemicProfile::logistic;
    // deformed-profile constants: f1(N) = f(N) - c1*exp(-(c2*(N-c3))^2)
    double c1 = 60.0, c2 = 0.04, c3 = 90.0;

    void check() const {
        if (!(D > 0 && p > 0 && alpha > 0 && beta > 0 && gamma_rec > 0 &&
              m_sat > 0 && d > 0 && N_max > 0 && r > 0))
            throw DomainError("EpidemicParams: all rates must be positive");
        if (!(a_comb() < beta))
            throw DomainError("EpidemicParams: need d+gamma+alpha < beta for a "
                              "threshold N0 to exist");
    }

    double a_comb() const { return d + gamma_rec + alpha; }
    double g_inc(double S, double /*N*/) const { return beta * S / (m_sat + S); }
    double dg_dS(double S, double /*N*/) const {
        double q = m_sat + S;
        return beta * m_sat / (q * q);
    }
    double S_line(double N) const { return D / (D + p) * N; }

    double f_slow(double N) const {
        double base = r * N * (1.0 - N / N_max);
        if (profile == EpidemicProfile::logistic) return base;
        double u = c2 * (N - c3);
        return base - c1 * std::exp(-u * u);
    }
    double df_slow(double N) const {
        double base = r * (1.0 - 2.0 * N / N_max);
        if (profile == EpidemicProfile::logistic) return base;
        double u = c2 * (N - c3);
        return base + c1 * 2.0 * u * c2 * std::exp(-u * u);
    }
};

// Threshold N0: the unique N with g(S_line(N), N) = a on the equilibrium
// line; solved by bracketing (the residual contract is 1e-10).
inline double epidemic_N0(const EpidemicParams& prm) {
    prm.check();
    auto fn = [&](double N) { return prm.g_inc(prm.S_line(N), N) - prm.a_comb(); };
    double lo = 1e-9, hi = prm.N_max;
    if (!(fn(lo) < 0.0 && fn(hi) > 0.0))
        throw NumericError("epidemic_N0: no sign change in (0, N_max)");
    auto r = brent(fn, lo, hi, 1e-13 * prm.N_max, 1e-12);
    if (std::abs(fn(r.x)) > 1e-10)
        throw NumericError("epidemic_N0: residual above contract");
    return r.x;
}

// eps = 0 limiting system, state (S, I, N).
inline auto epidemic_center_rhs(const EpidemicParams& prm) {
    return [prm](double, const State<3>& u) -> State<3> {
        double S = u[0], I = u[1], N = u[2];
        double g = prm.g_inc(S, N);
        return {prm.D * N - g * I - (prm.D + prm.p) * S,
                (g - prm.a_comb()) * I,
                -prm.alpha * I};
    };
}

// Full system at eps > 0, state (S, I, N).
inline auto epidemic_full(const EpidemicParams& prm, double eps) {
    return [prm, eps](double, const State<3>& u) -> State<3> {
        double S = u[0], I = u[1], N = u[2];
        double g = prm.g_inc(S, N);
        double fN = prm.f_slow(N);
        return {prm.D * N + eps * fN - g * I - (prm.D + prm.p) * S,
                (g - prm.a_comb()) * I,
                eps * fN - prm.alpha * I};
    };
}

// Eigenvector for the unstable eigenvalue mu = g - a > 0 of the limiting
// system linearized at (S_line(N), 0, N); normalized, I-component positive.
inline State<3> epidemic_unstable_eigvec(const EpidemicParams& prm, double N) {
    double g = prm.g_inc(prm.S_line(N), N);
    double mu = g - prm.a_comb();
    if (!(mu > 0.0))
        throw DomainError("epidemic_unstable_eigvec: point is not on the "
                          "repelling part of the line (N <= N0)");
    double v3 = -prm.alpha / mu;
    double v1 = (-g + prm.D * v3) / (prm.D + prm.p + mu);
    double n = std::sqrt(v1 * v1 + 1.0 + v3 * v3);
    return {v1 / n, 1.0 / n, v3 / n};
}

// One limiting-system orbit of the manifold fan, resampled on a uniform
// time grid while I stays above the cut.
struct CmOrbit {
    double seed_N = 0.0;
    std::vector<double> t, S, I, N;
    std::vector<double> dSdI, dSdN, cond;
    std::vector<unsigned char> ok;
    bool truncated = false; // hit the T horizon before I fell below the cut
};

struct CenterManifoldTable {
    EpidemicParams prm;
    double delta = 0.0, T = 0.0;
    std::size_t M = 0, nt = 0;
    double I_cut = 0.0;
    std::vector<CmOrbit> orbits; // seed_N increasing

    struct Query {
        double S = 0.0, dSdI = 0.0, dSdN = 0.0;
        bool clamped = false; // above the outermost orbit, values clamped
    };

    // Tangent slope of the manifold in I at the line, from the strong
    // eigenvector (v1, 1, v3) with the equilibrium-line component removed.
    // Valid on both sides of N0 (mu = g - a of either sign).
    double dSdI_line(double N) const {
        double g = prm.g_inc(prm.S_line(N), N);
        double mu = g - prm.a_comb();
        if (mu == 0.0)
            throw DomainError("dSdI_line: degenerate eigenvalue at N=" +
                              std::to_string(N));
        double v3 = -prm.alpha / mu;
        double v1 = (-g + prm.D * v3) / (prm.D + prm.p + mu);
        return v1 - v3 * prm.D / (prm.D + prm.p);
    }

    // interpolate one orbit at a given N (N arrays are strictly decreasing)
    static bool orbit_at(const CmOrbit& o, double N, double out[4]) {
        if (o.N.empty() || N > o.N.front() || N < o.N.back()) return false;
        std::size_t lo = 0, hi = o.N.size() - 1;
        while (lo + 1 < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (o.N[mid] >= N) lo = mid; else hi = mid;
        }
        double span = o.N[lo] - o.N[hi];
        double w = span > 0.0 ? (o.N[lo] - N) / span : 0.0;
        out[0] = o.I[lo] + w * (o.I[hi] - o.I[lo]);
        out[1] = o.S[lo] + w * (o.S[hi] - o.S[lo]);
        out[2] = o.dSdI[lo] + w * (o.dSdI[hi] - o.dSdI[lo]);
        out[3] = o.dSdN[lo] + w * (o.dSdN[hi] - o.dSdN[lo]);
        return true;
    }

    Query query(double I, double N) const {
        if (I < 0.0) throw DomainError("CenterManifoldTable: negative I query");
        Query q;
        // entries (I_k, S_k, dSdI_k, dSdN_k) at this N, ordered by I
        double prevI = 0.0;
        double prevV[3] = {prm.S_line(N), dSdI_line(N), prm.D / (prm.D + prm.p)};
        for (const auto& o : orbits) {
            double cur[4];
            if (!orbit_at(o, N, cur)) continue;
            if (cur[0] >= I) {
                double span = cur[0] - prevI;
                double w = span > 0.0 ? (I - prevI) / span : 0.0;
                q.S = prevV[0] + w * (cur[1] - prevV[0]);
                q.dSdI = prevV[1] + w * (cur[2] - prevV[1]);
                q.dSdN = prevV[2] + w * (cur[3] - prevV[2]);
                return q;
            }
            prevI = cur[0];
            prevV[0] = cur[1]; prevV[1] = cur[2]; prevV[2] = cur[3];
        }
        // above the outermost orbit at this N: clamp (tolerated up to 10%
        // relative, else it is a genuine coverage error)
        if (prevI > 0.0 && I <= 1.10 * prevI) {
            q.S = prevV[0]; q.dSdI = prevV[1]; q.dSdN = prevV[2];
            q.clamped = true;
            return q;
        }
        throw DomainError("CenterManifoldTable: query (I=" + std::to_string(I) +
                          ", N=" + std::to_string(N) + ") outside table coverage");
    }

    void save_csv(const std::string& path) const;
    static CenterManifoldTable load_csv(const std::string& path,
                                        const EpidemicParams& prm);
};

struct CmBuildOptions {
    double delta = 0.0;  // seed offset; 0 = 1e-4 * N_max
    double T = 0.0;      // horizon; 0 = auto from the outermost orbit
    std::size_t M = 120; // orbit count
    std::size_t nt = 8000; // time samples per orbit
    double I_cut = 1e-7;
    double seed_margin = 0.0; // 0 = delta, offset of the innermost seed above N0
    Tolerances tol{1e-10, 1e-13};
    double cond_max = 1e8;
};

inline CenterManifoldTable build_center_manifold(const EpidemicParams& prm,
                                                 CmBuildOptions opt = {}) {
    prm.check();
    if (opt.M < 50) throw DomainError("build_center_manifold: M must be >= 50");
    if (opt.delta <= 0.0) opt.delta = 1e-4 * prm.N_max;
    if (opt.seed_margin <= 0.0) opt.seed_margin = opt.delta;
    double N0 = epidemic_N0(prm);

    auto rhs = epidemic_center_rhs(prm);
    auto run_orbit = [&](double seed_N, double t_hi, const Tolerances& tol) {
        auto v = epidemic_unstable_eigvec(prm, seed_N);
        State<3> u0{prm.S_line(seed_N) + opt.delta * v[0], opt.delta * v[1],
                    seed_N + opt.delta * v[2]};
        std::vector<EventSpec> ev{EventSpec::b_level(opt.I_cut, EventDirection::down, 1)};
        IntegratorOptions io;
        io.tol = tol;
        io.store_dense = true;
        io.sample_stride = 4;
        return integrate<3>(rhs, u0, 0.0, t_hi, ev, io);
    };

    if (opt.T <= 0.0) {
        auto pilot = run_orbit(prm.N_max, 1e9, Tolerances{1e-6, 1e-9});
        if (pilot.termination != Termination::event_hit)
            throw NumericError("build_center_manifold: pilot orbit did not return "
                               "to the equilibrium line");
        opt.T = 1.2 * pilot.t_end();
    }

    CenterManifoldTable tab;
    tab.prm = prm;
    tab.delta = opt.delta;
    tab.T = opt.T;
    tab.M = opt.M;
    tab.nt = opt.nt;
    tab.I_cut = opt.I_cut;
    tab.orbits.resize(opt.M);

    double seed_lo = N0 + opt.seed_margin, seed_hi = prm.N_max;
    double dt = opt.T / double(opt.nt);
    for (std::size_t k = 0; k < opt.M; ++k) {
        double seed = seed_lo + (seed_hi - seed_lo) * double(k) / double(opt.M - 1);
        auto path = run_orbit(seed, opt.T, opt.tol);
        if (path.termination == Termination::step_failure)
            throw NumericError("build_center_manifold: " + path.diagnostic);
        CmOrbit& o = tab.orbits[k];
        o.seed_N = seed;
        o.truncated = path.termination == Termination::time_limit;
        double t_end = path.t_end();
        for (std::size_t j = 0; ; ++j) {
            double tj = double(j) * dt;
            if (tj > t_end) break;
            auto u = path.interpolate(tj);
            o.t.push_back(tj);
            o.S.push_back(u[0]);
            o.I.push_back(u[1]);
            o.N.push_back(u[2]);
        }
        // include the landing point so coverage reaches the omega end
        if (!o.t.empty() && o.t.back() < t_end) {
            const auto& u = path.back();
            o.t.push_back(t_end);
            o.S.push_back(u[0]);
            o.I.push_back(u[1]);
            o.N.push_back(u[2]);
        }
    }

    // difference quotients: time differences along orbit k, transverse
    // differences against orbit k+1 (k-1 for the outermost), solved as a
    // 2x2 system per cell
    for (std::size_t k = 0; k < opt.M; ++k) {
        CmOrbit& o = tab.orbits[k];
        const CmOrbit& q = tab.orbits[k + 1 < opt.M ? k + 1 : k - 1];
        std::size_t n = o.t.size();
        o.dSdI.assign(n, 0.0);
        o.dSdN.assign(n, 0.0);
        o.cond.assign(n, std::numeric_limits<double>::infinity());
        o.ok.assign(n, 0);
        for (std::size_t j = 0; j + 1 < n; ++j) {
            if (j >= q.t.size()) break;
            double dtS = o.S[j + 1] - o.S[j];
            double dtI = o.I[j + 1] - o.I[j];
            double dtN = o.N[j + 1] - o.N[j];
            double dxS = q.S[j] - o.S[j];
            double dxI = q.I[j] - o.I[j];
            double dxN = q.N[j] - o.N[j];
            double det = dtI * dxN - dxI * dtN;
            if (det == 0.0) continue;
            double a11 = dxN / det, a12 = -dxI / det;
            double a21 = -dtN / det, a22 = dtI / det;
            double nm = std::sqrt(dtI * dtI + dxI * dxI + dtN * dtN + dxN * dxN);
            double ni = std::sqrt(a11 * a11 + a12 * a12 + a21 * a21 + a22 * a22);
            double cond = nm * ni;
            o.cond[j] = cond;
            if (cond > opt.cond_max) continue;
            o.dSdI[j] = dtS * a11 + dxS * a21;
            o.dSdN[j] = dtS * a12 + dxS * a22;
            o.ok[j] = 1;
        }
        // flagged cells: nearest valid neighbor along the same orbit
        std::ptrdiff_t last_ok = -1;
        for (std::size_t j = 0; j < n; ++j) {
            if (o.ok[j]) { last_ok = std::ptrdiff_t(j); continue; }
            std::size_t next_ok = n;
            for (std::size_t jj = j + 1; jj < n; ++jj)
                if (o.ok[jj]) { next_ok = jj; break; }
            if (last_ok >= 0 && next_ok < n) {
                double w = double(j - std::size_t(last_ok)) / double(next_ok - std::size_t(last_ok));
                o.dSdI[j] = (1.0 - w) * o.dSdI[last_ok] + w * o.dSdI[next_ok];
                o.dSdN[j] = (1.0 - w) * o.dSdN[last_ok] + w * o.dSdN[next_ok];
            } else if (last_ok >= 0) {
                o.dSdI[j] = o.dSdI[last_ok];
                o.dSdN[j] = o.dSdN[last_ok];
            } else if (next_ok < n) {
                o.dSdI[j] = o.dSdI[next_ok];
                o.dSdN[j] = o.dSdN[next_ok];
            }
        }
    }
    return tab;
}

inline void CenterManifoldTable::save_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << "orbit,seed_N,t,I,N,S,dSdI,dSdN,cond,ok\n";
    char buf[400];
    for (std::size_t k = 0; k < orbits.size(); ++k) {
        const CmOrbit& o = orbits[k];
        for (std::size_t j = 0; j < o.t.size(); ++j) {
            std::snprintf(buf, sizeof buf,
                          "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n",
                          k, o.seed_N, o.t[j], o.I[j], o.N[j], o.S[j], o.dSdI[j],
                          o.dSdN[j], o.cond[j], int(o.ok[j]));
            os << buf;
        }
    }
}

inline CenterManifoldTable CenterManifoldTable::load_csv(const std::string& path,
                                                         const EpidemicParams& prm) {
    std::ifstream is(path);
    if (!is) throw Error("cannot open " + path);
    CenterManifoldTable tab;
    tab.prm = prm;
    std::string line;
    std::getline(is, line); // header
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::size_t k;
        double seed, t, I, N, S, dSdI, dSdN, cond;
        int ok;
        if (std::sscanf(line.c_str(),
                        "%zu,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%lf,%d",
                        &k, &seed, &t, &I, &N, &S, &dSdI, &dSdN, &cond, &ok) != 10)
            throw Error("malformed table row: " + line);
        if (k >= tab.orbits.size()) tab.orbits.resize(k + 1);
        CmOrbit& o = tab.orbits[k];
        o.seed_N = seed;
        o.t.push_back(t);
        o.I.push_back(I);
        o.N.push_back(N);
        o.S.push_back(S);
        o.dSdI.push_back(dSdI);
        o.dSdN.push_back(dSdN);
        o.cond.push_back(cond);
        o.ok.push_back(static_cast<unsigned char>(ok));
    }
    tab.M = tab.orbits.size();
    return tab;
}

// Planar reduced model on the center manifold, (a, b) = (N, I).
inline SlowFastModel epidemic_reduced(const EpidemicParams& prm,
                                      const CenterManifoldTable& table) {
    prm.check();
    SlowFastModel m;
    m.name = "epidemic";
    m.a_min = 1e-6;
    m.a_max = prm.N_max;
    m.a_bar = epidemic_N0(prm);
    m.f = [prm](double a, double, double) { return prm.f_slow(a); };
    m.df_da = [prm](double a, double, double) { return prm.df_slow(a); };
    m.h = [prm](double, double, double) { return -prm.alpha; };
    m.dh_da = [](double, double, double) { return 0.0; };
    const CenterManifoldTable* tab = &table;
    m.g = [prm, tab](double a, double b, double) {
        double S = (b <= 0.0) ? prm.S_line(a) : tab->query(b, a).S;
        return prm.g_inc(S, a) - prm.a_comb();
    };
    m.dg_db = [prm, tab](double a, double b, double) {
        auto q = (b <= 0.0)
            ? CenterManifoldTable::Query{prm.S_line(a), tab->dSdI_line(a), 0.0, false}
            : tab->query(b, a);
        return prm.dg_dS(q.S, a) * q.dSdI;
    };
    m.tabulated_dg_db = true;
    m.flags.h_independent_of_a = true;
    return m;
}

// Model-native lambda (h = -alpha form): log term plus the manifold path
// integral, taken in the bounded time form dg/dS * dS~/dI * I dt.
inline double epidemic_lambda(const EpidemicParams& prm,
                              const CenterManifoldTable& table,
                              const HeteroclinicOrbit& orbit) {
    double fa = prm.f_slow(orbit.a_alpha), fo = prm.f_slow(orbit.a_omega);
    if (!(fa > 0.0) || !(fo > 0.0))
        throw DomainError("epidemic_lambda: f(N) <= 0 at an orbit endpoint");
    auto q = path_integral(orbit.path, [&](double, const State<2>& y) {
        double N = y[0], I = y[1];
        auto c = table.query(I, N);
        return prm.dg_dS(c.S, N) * c.dSdI * I;
    });
    return std::log(fa / fo) + q.value;
}

// Successive upward crossings of the section {I = delta1} for the full 3-D
// flow, with the peak I between crossings (projection of the section logic
// onto the reduced (N, I) plane).
struct SectionReturn {
    double N = 0.0; // crossing N-coordinate
    double t = 0.0;
    double peak_I = 0.0;           // since the previous crossing
    double manifold_residual = 0.0; // |S - S~(I,N)| at the crossing
};

inline std::vector<SectionReturn> epidemic_section_returns(
    const EpidemicParams& prm, double eps, State<3> init, double delta1,
    int max_returns, const CenterManifoldTable* table = nullptr,
    Tolerances tol = {1e-9, 1e-12}) {
    if (!(init[1] > 0.0))
        throw DomainError("epidemic_section_returns: initial I must be positive");
    std::vector<SectionReturn> out;
    // integrate in (S, w = ln I, N): between epidemics I decays like
    // exp(-mu*t) over t ~ 1/eps and underflows in linear form
    auto rhs = [prm, eps](double, const State<3>& u) -> State<3> {
        double S = u[0], I = std::exp(std::min(u[1], 700.0)), N = u[2];
        double g = prm.g_inc(S, N);
        double fN = prm.f_slow(N);
        return {prm.D * N + eps * fN - g * I - (prm.D + prm.p) * S,
                g - prm.a_comb(),
                eps * fN - prm.alpha * I};
    };
    std::vector<EventSpec> ev{
        EventSpec::b_level(std::log(delta1), EventDirection::up, 1)};
    IntegratorOptions io;
    io.tol = tol;
    io.store_dense = false;
    io.sample_stride = 32;
    io.max_step = 100.0; // the quiet phase is locally linear in w
    double t = 0.0, t_max = 50.0 / eps;
    State<3> u = {init[0], std::log(init[1]), init[2]};
    for (int k = 0; k < max_returns; ++k) {
        auto path = integrate<3>(rhs, u, t, t_max, ev, io);
        if (path.termination != Termination::event_hit) break;
        SectionReturn s;
        s.N = path.event_state[2];
        s.t = path.event_time;
        double peak_w = -std::numeric_limits<double>::infinity();
        for (const auto& y : path.y) peak_w = std::max(peak_w, y[1]);
        s.peak_I = std::exp(peak_w);
        if (table) {
            try {
                s.manifold_residual =
                    std::abs(path.event_state[0] -
                             table->query(std::exp(path.event_state[1]),
                                          path.event_state[2]).S);
            } catch (const DomainError&) {
                s.manifold_residual = std::numeric_limits<double>::quiet_NaN();
            }
        }
        out.push_back(s);
        t = path.event_time;
        u = path.event_state;
    }
    return out;
}

} // namespace slowfast
