#pragma once

// The two characteristic functions evaluated on a heteroclinic orbit:
//   chi(s)    = integral of g(a,0,0)/f(a,0,0) over [a_omega, a_alpha]
//   lambda(s) = ln(f(a_alpha,0,0)/f(a_omega,0,0))
//             + int_gamma (da h / h) da + int_gamma (db g / h) da.
// All path integrals are taken in the bounded time form: along the fast
// flow da = b*h dt, so (u/h) da = u*b dt, which stays finite where g or h
// pass through zero at the orbit peak.

#include <cmath>
#include <string>

#include "slowfast/errors.hpp"
#include "slowfast/heteroclinic.hpp"
#include "slowfast/model.hpp"
#include "slowfast/quadrature.hpp"

namespace slowfast {

enum class LambdaForm { general, separable_fh, h_independent, g_factor };

inline const char* to_string(LambdaForm f) {
    switch (f) {
        case LambdaForm::general: return "general";
        case LambdaForm::separable_fh: return "separable_fh";
        case LambdaForm::h_independent: return "h_independent";
        case LambdaForm::g_factor: return "g_factor";
    }
    return "?";
}

struct CharacteristicValues {
    double s = 0.0;
    double chi = 0.0;
    double chi_err = 0.0;
    double lambda = 0.0;
    double lambda_err = 0.0;
    LambdaForm lambda_form = LambdaForm::general;
    // endpoint data
    double a_alpha = 0.0, a_omega = 0.0;
    double f_alpha = 0.0, f_omega = 0.0;
    // cross-check extras
    double chi_line = 0.0;
    double chi_line_err = 0.0;
    double lambda_general_value = 0.0;
};

inline std::pair<double, double> chi_endpoint(const SlowFastModel& m,
                                              const HeteroclinicOrbit& orbit) {
    auto ratio = [&](double a) {
        double fv = m.f(a, 0.0, 0.0);
        if (!(fv > 0.0))
            throw DomainError("chi_endpoint: f(a,0,0) <= 0 at a=" + std::to_string(a));
        return m.g(a, 0.0, 0.0) / fv;
    };
    auto q = adaptive_quad(ratio, orbit.a_omega, orbit.a_alpha, 1e-12, 1e-14);
    return {q.value, q.error};
}

inline std::pair<double, double> chi_line_integral(const SlowFastModel& m,
                                                   const HeteroclinicOrbit& orbit) {
    // (g/f)(a,0,0) da along gamma, da = b*h(a,b,0) dt. The path runs with a
    // decreasing (h < 0) while chi is oriented over increasing a, hence the
    // sign flip.
    auto q = path_integral(orbit.path, [&](double, const State<2>& y) {
        double a = y[0], b = y[1];
        double fv = m.f(a, 0.0, 0.0);
        if (!(fv > 0.0))
            throw DomainError("chi_line_integral: f(a,0,0) <= 0 on path");
        return m.g(a, 0.0, 0.0) / fv * b * m.h(a, b, 0.0);
    });
    // truncated tails: da/db = h/g, integrand ~ (g/f)*(h/g) = h/f per unit b
    double tail = 0.0;
    for (double aend : {orbit.a_alpha, orbit.a_omega})
        tail += std::abs(orbit.tail_cut * m.h(aend, 0.0, 0.0) / m.f(aend, 0.0, 0.0));
    return {-q.value, q.error + tail};
}

namespace detail {

// int_gamma (da h / h) da  ==  int (da h) * b dt
inline QuadResult term_dah(const SlowFastModel& m, const HeteroclinicOrbit& orbit) {
    return path_integral(orbit.path, [&](double, const State<2>& y) {
        return m.Dh_da(y[0], y[1], 0.0) * y[1];
    });
}

// int_gamma (db g / h) da  ==  int (db g) * b dt
inline QuadResult term_dbg(const SlowFastModel& m, const HeteroclinicOrbit& orbit) {
    return path_integral(orbit.path, [&](double, const State<2>& y) {
        return m.Dg_db(y[0], y[1], 0.0) * y[1];
    });
}

inline double tail_budget(const SlowFastModel& m, const HeteroclinicOrbit& orbit,
                          double integrand_alpha, double integrand_omega) {
    // below b_stop the omitted piece is O(b_stop) per endpoint: the
    // integrand (u*b dt form) is ~ u*b and the residence time scales like
    // 1/|g|; bound it crudely by b_stop * |u| / |g| at each endpoint.
    double tail = 0.0;
    double g_al = std::abs(m.g(orbit.a_alpha, 0.0, 0.0));
    double g_om = std::abs(m.g(orbit.a_omega, 0.0, 0.0));
    if (g_al > 0.0) tail += orbit.tail_cut * std::abs(integrand_alpha) / g_al;
    if (g_om > 0.0) tail += orbit.tail_cut * std::abs(integrand_omega) / g_om;
    return tail;
}

inline std::pair<double, double> log_term(const SlowFastModel& m,
                                          const HeteroclinicOrbit& orbit) {
    double fa = m.f(orbit.a_alpha, 0.0, 0.0);
    double fo = m.f(orbit.a_omega, 0.0, 0.0);
    if (!(fa > 0.0) || !(fo > 0.0))
        throw DomainError("lambda: f(a,0,0) <= 0 at an orbit endpoint");
    return {std::log(fa / fo), 0.0};
}

} // namespace detail

inline std::pair<double, double> lambda_general(const SlowFastModel& m,
                                                const HeteroclinicOrbit& orbit) {
    auto [lg, lg_err] = detail::log_term(m, orbit);
    auto t1 = detail::term_dah(m, orbit);
    auto t2 = detail::term_dbg(m, orbit);
    double tail = detail::tail_budget(
        m, orbit,
        m.Dh_da(orbit.a_alpha, 0.0, 0.0) + m.Dg_db(orbit.a_alpha, 0.0, 0.0),
        m.Dh_da(orbit.a_omega, 0.0, 0.0) + m.Dg_db(orbit.a_omega, 0.0, 0.0));
    return {lg + t1.value + t2.value, lg_err + t1.error + t2.error + tail};
}

// f and h both a-linear: the log term cancels against the da h/h integral
// and only the db g term survives.
inline std::pair<double, double> lambda_separable(const SlowFastModel& m,
                                                  const HeteroclinicOrbit& orbit) {
    if (!m.flags.separable_fh)
        throw DomainError("lambda_separable: separable_fh flag not set");
    auto t2 = detail::term_dbg(m, orbit);
    double tail = detail::tail_budget(m, orbit,
                                      m.Dg_db(orbit.a_alpha, 0.0, 0.0),
                                      m.Dg_db(orbit.a_omega, 0.0, 0.0));
    return {t2.value, t2.error + tail};
}

// h independent of a: the da h/h integral vanishes identically.
inline std::pair<double, double> lambda_h_independent(const SlowFastModel& m,
                                                      const HeteroclinicOrbit& orbit) {
    if (!m.flags.h_independent_of_a)
        throw DomainError("lambda_h_independent: flag not set");
    auto [lg, lg_err] = detail::log_term(m, orbit);
    auto t2 = detail::term_dbg(m, orbit);
    double tail = detail::tail_budget(m, orbit,
                                      m.Dg_db(orbit.a_alpha, 0.0, 0.0),
                                      m.Dg_db(orbit.a_omega, 0.0, 0.0));
    return {lg + t2.value, lg_err + t2.error + tail};
}

// g = phi(b)*G: the phi'/phi part of db g/g is an exact differential of b
// and integrates to zero around the excursion, leaving the G term,
//   int (db G / G) db = int (db G) * phi(b) * b dt.
inline std::pair<double, double> lambda_g_factor(const SlowFastModel& m,
                                                 const HeteroclinicOrbit& orbit) {
    if (!m.flags.g_factorizable || !m.flags.phi || !m.flags.G)
        throw DomainError("lambda_g_factor: flag or evaluators missing");
    auto [lg, lg_err] = detail::log_term(m, orbit);
    auto t1 = detail::term_dah(m, orbit);
    auto tG = path_integral(orbit.path, [&](double, const State<2>& y) {
        return m.DG_db(y[0], y[1], 0.0) * m.flags.phi(y[1]) * y[1];
    });
    double tail = detail::tail_budget(
        m, orbit,
        m.Dh_da(orbit.a_alpha, 0.0, 0.0) +
            m.DG_db(orbit.a_alpha, 0.0, 0.0) * m.flags.phi(0.0),
        m.Dh_da(orbit.a_omega, 0.0, 0.0) +
            m.DG_db(orbit.a_omega, 0.0, 0.0) * m.flags.phi(0.0));
    return {lg + t1.value + tG.value, lg_err + t1.error + tG.error + tail};
}

// Full evaluation at one family point. The reported lambda uses the most
// specific declared structure; the general form is always computed as a
// cross-check and stored alongside.
inline CharacteristicValues evaluate_characteristics(const SlowFastModel& m,
                                                     const HeteroclinicOrbit& orbit) {
    CharacteristicValues v;
    v.s = orbit.s;
    v.a_alpha = orbit.a_alpha;
    v.a_omega = orbit.a_omega;
    v.f_alpha = m.f(orbit.a_alpha, 0.0, 0.0);
    v.f_omega = m.f(orbit.a_omega, 0.0, 0.0);

    auto [chi, chi_err] = chi_endpoint(m, orbit);
    v.chi = chi;
    v.chi_err = chi_err + std::abs(orbit.tail_correction) *
                              std::abs(m.g(orbit.a_omega, 0.0, 0.0) /
                                       m.f(orbit.a_omega, 0.0, 0.0));
    auto [cl, cl_err] = chi_line_integral(m, orbit);
    v.chi_line = cl;
    v.chi_line_err = cl_err;

    auto [lgen, lgen_err] = lambda_general(m, orbit);
    v.lambda_general_value = lgen;
    if (m.flags.separable_fh) {
        auto [l, e] = lambda_separable(m, orbit);
        v.lambda = l; v.lambda_err = e;
        v.lambda_form = LambdaForm::separable_fh;
    } else if (m.flags.h_independent_of_a) {
        auto [l, e] = lambda_h_independent(m, orbit);
        v.lambda = l; v.lambda_err = e;
        v.lambda_form = LambdaForm::h_independent;
    } else if (m.flags.g_factorizable) {
        auto [l, e] = lambda_g_factor(m, orbit);
        v.lambda = l; v.lambda_err = e;
        v.lambda_form = LambdaForm::g_factor;
    } else {
        v.lambda = lgen; v.lambda_err = lgen_err;
        v.lambda_form = LambdaForm::general;
    }
    return v;
}

} // namespace slowfast
