#pragma once

// Chemostat predator-prey model. The full 3-D system
//   S' = eps*(S0 - S) - rho*m*S*x
//   x' = x*(-eps + m*S) - c*y*p(x)
//   y' = y*(-eps + p(x))
// has an attracting invariant simplex S + rho*x + c*rho*y = S0; on it the
// dynamics reduce to
//   x' = c*(rho*m*x + p(x)) * (F_eps(x) - y),   y' = y*(-eps + p(x)),
// a planar slow-fast system with (-y, x) playing the role of (a, b).
// The heteroclinic family is parameterized by x0, the x-coordinate where
// the orbit crosses the isocline y = F(x).

#include <cmath>
#include <functional>

#include "slowfast/errors.hpp"
#include "slowfast/heteroclinic.hpp"
#include "slowfast/model.hpp"
#include "slowfast/quadrature.hpp"
#include "slowfast/rootfind.hpp"

namespace slowfast {

struct ChemostatParams {
    double S0 = 10.0; // input nutrient concentration
    double m = 1.0;   // prey uptake rate
    double rho = 1.0; // nutrient consumption constant
    double c = 1.0;   // predation constant
    std::function<double(double)> p;  // functional response, p(0)=0, p'(0)>0
    std::function<double(double)> dp; // its derivative

    void check() const {
        if (!(S0 > 0.0 && m > 0.0 && rho > 0.0 && c > 0.0))
            throw DomainError("ChemostatParams: rates must be positive");
        if (!p || !dp) throw DomainError("ChemostatParams: p and dp required");
        if (std::abs(p(0.0)) > 1e-14 || !(dp(0.0) > 0.0))
            throw DomainError("ChemostatParams: need p(0)=0 and p'(0)>0");
    }

    double p_over_x(double x) const { return x > 1e-10 ? p(x) / x : dp(0.0); }
    double ybar() const { return m * S0 / (c * (rho * m + dp(0.0))); }
    double x_max() const { return S0 / rho; }

    double F_eps(double x, double eps) const {
        if (x <= 1e-10)
            return (-eps + m * S0) / (c * (rho * m + dp(0.0)));
        return x * (-eps + m * S0 - rho * m * x) / (c * (rho * m * x + p(x)));
    }
    double F(double x) const { return F_eps(x, 0.0); }
    double F_prime(double x) const {
        // quotient rule; near 0 fall back to a symmetric-difference value at
        // a safe abscissa (F' extends continuously to x=0)
        if (x < 1e-7) x = 1e-7;
        double num = x * (m * S0 - rho * m * x);
        double dnum = m * S0 - 2.0 * rho * m * x;
        double den = c * (rho * m * x + p(x));
        double dden = c * (rho * m + dp(x));
        return (dnum * den - num * dden) / (den * den);
    }
};

inline ChemostatParams make_chemostat_holling2(double S0, double m, double rho,
                                               double c, double half_sat,
                                               double max_rate) {
    ChemostatParams prm;
    prm.S0 = S0; prm.m = m; prm.rho = rho; prm.c = c;
    prm.p = [half_sat, max_rate](double x) { return max_rate * x / (half_sat + x); };
    prm.dp = [half_sat, max_rate](double x) {
        double d = half_sat + x;
        return max_rate * half_sat / (d * d);
    };
    prm.check();
    return prm;
}

// Planar reduced model in (a, b) = (-y, x) coordinates.
inline SlowFastModel chemostat_reduced(const ChemostatParams& prm) {
    prm.check();
    SlowFastModel m;
    m.name = "chemostat";
    m.a_min = -prm.S0 / (prm.c * prm.rho);
    m.a_max = 0.0;
    m.a_bar = -prm.ybar();
    m.f = [](double a, double, double) { return -a; };
    m.df_da = [](double, double, double) { return -1.0; };
    m.h = [prm](double a, double b, double) { return a * prm.p_over_x(b); };
    m.dh_da = [prm](double, double b, double) { return prm.p_over_x(b); };
    m.g = [prm](double a, double b, double eps) {
        return prm.c * (prm.rho * prm.m + prm.p_over_x(b)) * (prm.F_eps(b, eps) + a);
    };
    m.flags.separable_fh = true;
    m.flags.g_factorizable = true;
    m.flags.phi = [prm](double b) {
        return prm.c * (prm.rho * prm.m + prm.p_over_x(b));
    };
    m.flags.G = [prm](double a, double b, double eps) { return prm.F_eps(b, eps) + a; };
    m.flags.dG_db = [prm](double, double b, double) { return prm.F_prime(b); };
    return m;
}

struct ChemostatFamilyOptions {
    Tolerances tol{1e-10, 1e-13};
    double b_stop = 0.0; // 0 = auto: 1e-7 * orbit b-scale
    double t_max = 1e8;
};

// gamma(x0): the fast orbit through (x0, F(x0)). Integrated backward to the
// alpha end first, then forward through the whole excursion so the stored
// path is a single time-ordered run.
inline HeteroclinicOrbit chemostat_orbit(const SlowFastModel& model,
                                         const ChemostatParams& prm, double x0,
                                         const ChemostatFamilyOptions& opt = {}) {
    if (!(x0 > 0.0) || !(x0 < prm.x_max()))
        throw DomainError("chemostat_orbit: x0 outside (0, S0/rho)");
    State<2> seed{-prm.F(x0), x0};

    HetOptions ho;
    ho.tol = opt.tol;
    ho.t_max = opt.t_max;
    ho.a_window_lo = model.a_min - 1.0;
    ho.a_window_hi = 1.0;

    // x0 is the orbit's x-maximum (x' = 0 and x'' < 0 on the isocline), so
    // the b scale is known without a pilot run
    double b_stop = opt.b_stop > 0.0 ? opt.b_stop : 1e-7 * x0;

    auto bw = integrate_fast<true>(model, seed, b_stop, ho);
    if (bw.termination != Termination::event_hit || bw.event_index != 0)
        throw NumericError("chemostat_orbit: backward run found no connection "
                           "(x0=" + std::to_string(x0) + ")");
    State<2> alpha_end = bw.back();

    auto fw = integrate_fast<false>(model, alpha_end, b_stop, ho);
    if (fw.termination != Termination::event_hit || fw.event_index != 0)
        throw NumericError("chemostat_orbit: forward run found no connection "
                           "(x0=" + std::to_string(x0) + ")");

    HeteroclinicOrbit orbit;
    orbit.s = x0;
    orbit.seed_offset = alpha_end[1];
    orbit.tail_cut = b_stop;
    orbit.a_alpha = alpha_end[0] + detail::tail_drift(model, alpha_end[0], alpha_end[1]);
    double a_end = fw.back()[0], b_end = fw.back()[1];
    orbit.tail_correction = detail::tail_drift(model, a_end, b_end);
    orbit.a_omega = a_end + orbit.tail_correction;
    for (const auto& y : fw.y) orbit.peak_b = std::max(orbit.peak_b, y[1]);
    orbit.path = std::move(fw);
    return orbit;
}

struct ChemostatChi {
    double endpoint_form = 0.0; // integral of (y - ybar)/y over [y_alpha, y_omega]
    double psi_form = 0.0; // psi(y_omega) - psi(y_alpha), psi(y) = y - ybar - ybar*ln(y/ybar)
};

// Model-native chi, normalized as in the source formulas. Relative to the
// generic chi under the (-y, x) role mapping the exact factor is
// -c*(rho*m + p'(0)) (note the sign: the mapping reverses orientation).
inline ChemostatChi chemostat_chi(const ChemostatParams& prm,
                                  const HeteroclinicOrbit& orbit) {
    double y_alpha = -orbit.a_alpha, y_omega = -orbit.a_omega;
    if (!(y_alpha > 0.0) || !(y_omega > 0.0))
        throw DomainError("chemostat_chi: nonpositive orbit endpoint");
    double ybar = prm.ybar();
    ChemostatChi out;
    out.endpoint_form = adaptive_quad([ybar](double y) { return (y - ybar) / y; },
                                      y_alpha, y_omega, 1e-12, 1e-14).value;
    auto psi = [ybar](double y) { return y - ybar - ybar * std::log(y / ybar); };
    out.psi_form = psi(y_omega) - psi(y_alpha);
    return out;
}

// Line-integral chi along gamma(x0), evaluated in the bounded time form
// p(x)*(F(x) - ybar) dt (the two x-branches Y-(x), Y+(x) correspond to the
// rising and falling halves of the time parameterization).
inline double chemostat_chi_line(const ChemostatParams& prm,
                                 const HeteroclinicOrbit& orbit) {
    if (!single_peaked(orbit))
        throw NumericError("chemostat_chi_line: branch split failed, orbit is "
                           "not single-peaked in x");
    double ybar = prm.ybar();
    auto q = path_integral(orbit.path, [&](double, const State<2>& y) {
        return prm.p(y[1]) * (prm.F(y[1]) - ybar);
    });
    return q.value;
}

// Model-native lambda: int F'(x)/(F(x)-y) dx over both branches, evaluated
// in the equivalent bounded time form F'(x)*c*(rho*m*x + p(x)) dt. Equals
// the generic lambda exactly (role-mapping factor 1).
inline double chemostat_lambda(const ChemostatParams& prm,
                               const HeteroclinicOrbit& orbit) {
    if (!single_peaked(orbit))
        throw NumericError("chemostat_lambda: branch split failed, orbit is "
                           "not single-peaked in x");
    auto q = path_integral(orbit.path, [&](double, const State<2>& y) {
        double x = y[1];
        return prm.F_prime(x) * prm.c * (prm.rho * prm.m * x + prm.p(x));
    });
    return q.value;
}

struct OneHumpResult {
    bool one_hump = false;
    double x_hat = std::numeric_limits<double>::quiet_NaN();
};

// Samples F' on (0, S0/rho): exactly one sign change, + to -, is required.
inline OneHumpResult one_hump_check(const ChemostatParams& prm, std::size_t n_grid = 400) {
    OneHumpResult res;
    double lo = 1e-6 * prm.x_max(), hi = prm.x_max() * (1.0 - 1e-9);
    int sign_changes = 0;
    double prev = prm.F_prime(lo);
    bool started_positive = prev > 0.0;
    for (std::size_t i = 1; i < n_grid; ++i) {
        double x = lo + (hi - lo) * double(i) / double(n_grid - 1);
        double d = prm.F_prime(x);
        if ((prev > 0.0) != (d > 0.0)) {
            ++sign_changes;
            if (sign_changes == 1 && prev > 0.0)
                res.x_hat = brent([&](double u) { return prm.F_prime(u); },
                                  x - (hi - lo) / double(n_grid - 1), x, 1e-12).x;
        }
        prev = d;
    }
    res.one_hump = started_positive && sign_changes == 1 && std::isfinite(res.x_hat);
    return res;
}

// Full 3-D vector field, state (S, x, y).
inline auto chemostat_full(const ChemostatParams& prm, double eps) {
    return [prm, eps](double, const State<3>& u) -> State<3> {
        double S = u[0], x = u[1], y = u[2];
        return {eps * (prm.S0 - S) - prm.rho * prm.m * S * x,
                x * (-eps + prm.m * S) - prm.c * y * prm.p(x),
                y * (-eps + prm.p(x))};
    };
}

} // namespace slowfast
