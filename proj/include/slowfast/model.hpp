#pragma once

// The abstract planar slow-fast model
//   a' = eps*f(a,b,eps) + b*h(a,b,eps),   b' = b*g(a,b,eps)
// together with numerical validation of the structural hypotheses it must
// satisfy (f > 0 on the equilibrium line, h < 0, g changes sign at a_bar).

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>

#include "slowfast/errors.hpp"

namespace slowfast {

using Evaluator = std::function<double(double a, double b, double eps)>;

struct StructureFlags {
    bool separable_fh = false;      // f = a*f~(b,eps), h = a*h~(b,eps)
    bool h_independent_of_a = false;
    bool g_factorizable = false;    // g = phi(b)*G(a,b,eps), phi(0) != 0
    std::function<double(double b)> phi;
    Evaluator G;
    Evaluator dG_db; // optional; finite differences otherwise
};

struct SlowFastModel {
    std::string name;
    Evaluator f, g, h;
    Evaluator df_da, dh_da, dg_db; // optional analytic partials
    // dg_db comes from a tabulated difference scheme rather than an exact
    // formula; the FD-consistency check does not apply to it
    bool tabulated_dg_db = false;
    double a_min = -std::numeric_limits<double>::infinity();
    double a_max = std::numeric_limits<double>::infinity();
    double a_bar = 0.0;
    StructureFlags flags;

    static double fd_step(double x) { return 1e-6 * std::max(1.0, std::abs(x)); }

    double Df_da(double a, double b, double eps) const {
        if (df_da) return df_da(a, b, eps);
        double s = fd_step(a);
        return (f(a + s, b, eps) - f(a - s, b, eps)) / (2.0 * s);
    }
    double Dh_da(double a, double b, double eps) const {
        if (dh_da) return dh_da(a, b, eps);
        double s = fd_step(a);
        return (h(a + s, b, eps) - h(a - s, b, eps)) / (2.0 * s);
    }
    double Dg_db(double a, double b, double eps) const {
        if (dg_db) return dg_db(a, b, eps);
        double s = fd_step(b);
        if (b - s < 0.0) // one-sided at the invariant axis
            return (g(a, b + s, eps) - g(a, b, eps)) / s;
        return (g(a, b + s, eps) - g(a, b - s, eps)) / (2.0 * s);
    }
    double DG_db(double a, double b, double eps) const {
        if (flags.dG_db) return flags.dG_db(a, b, eps);
        double s = fd_step(b);
        if (b - s < 0.0)
            return (flags.G(a, b + s, eps) - flags.G(a, b, eps)) / s;
        return (flags.G(a, b + s, eps) - flags.G(a, b - s, eps)) / (2.0 * s);
    }
};

struct GridSpec {
    double a_lo = 0.0, a_hi = 1.0;
    double b_hi = 1.0;
    std::size_t na = 200, nb = 200;
};

struct ConditionReport {
    std::string condition;
    bool pass = true;
    double a = std::numeric_limits<double>::quiet_NaN();
    double b = std::numeric_limits<double>::quiet_NaN();
    std::string message;
};

struct ValidationReport {
    ConditionReport turning_f{"f(a,0,0) > 0"};
    ConditionReport turning_h{"h(a,b,0) < 0"};
    ConditionReport turning_g{"g(a,0,0) sign change at a_bar"};
    ConditionReport partials{"analytic partials match finite differences"};
    ConditionReport structure{"structure flags consistent"};
    std::string boundary_note; // b = 0 row is checked but reported separately

    bool ok() const {
        return turning_f.pass && turning_h.pass && turning_g.pass &&
               partials.pass && structure.pass;
    }
    std::string summary() const {
        std::ostringstream os;
        for (const ConditionReport* c :
             {&turning_f, &turning_h, &turning_g, &partials, &structure}) {
            os << (c->pass ? "pass" : "FAIL") << "  " << c->condition;
            if (!c->pass)
                os << "  at (a,b)=(" << c->a << "," << c->b << ") " << c->message;
            os << "\n";
        }
        if (!boundary_note.empty()) os << "note: " << boundary_note << "\n";
        return os.str();
    }
};

// Samples the structural conditions on the interior of the grid rectangle
// (the hypotheses hold on open sets; endpoints like b=0 with f=0 at a
// domain edge would produce spurious failures). Passing this check is
// necessary, not sufficient.
inline ValidationReport validate_model(const SlowFastModel& m, const GridSpec& grid) {
    ValidationReport rep;
    if (!(grid.a_hi > grid.a_lo) || !(grid.b_hi > 0.0) || grid.na < 2 || grid.nb < 2)
        throw DomainError("validate_model: bad grid spec");
    if (!(m.a_bar > grid.a_lo && m.a_bar < grid.a_hi))
        rep.boundary_note = "a_bar lies outside the sampled a-window; turning_g "
                            "checked on one side only";

    const double da = (grid.a_hi - grid.a_lo) / double(grid.na);
    const double db = grid.b_hi / double(grid.nb);
    auto a_at = [&](std::size_t i) { return grid.a_lo + (double(i) + 0.5) * da; };
    auto b_at = [&](std::size_t j) { return (double(j) + 0.5) * db; };

    auto flag = [](ConditionReport& c, double a, double b, const std::string& msg) {
        if (!c.pass) return; // keep the first violation
        c.pass = false;
        c.a = a;
        c.b = b;
        c.message = msg;
    };

    bool boundary_h_ok = true;
    for (std::size_t i = 0; i < grid.na; ++i) {
        double a = a_at(i);
        double fv = m.f(a, 0.0, 0.0);
        if (!std::isfinite(fv)) flag(rep.turning_f, a, 0.0, "non-finite f");
        else if (fv <= 0.0) flag(rep.turning_f, a, 0.0, "f <= 0");
        double gv = m.g(a, 0.0, 0.0);
        if (!std::isfinite(gv)) flag(rep.turning_g, a, 0.0, "non-finite g");
        else if (a < m.a_bar && gv >= 0.0) flag(rep.turning_g, a, 0.0, "g >= 0 left of a_bar");
        else if (a > m.a_bar && gv <= 0.0) flag(rep.turning_g, a, 0.0, "g <= 0 right of a_bar");
        // h on the b=0 boundary, noted separately from the interior check
        double hv0 = m.h(a, 0.0, 0.0);
        if (!std::isfinite(hv0) || hv0 >= 0.0) boundary_h_ok = false;
        for (std::size_t j = 0; j < grid.nb; ++j) {
            double b = b_at(j);
            double hv = m.h(a, b, 0.0);
            if (!std::isfinite(hv)) flag(rep.turning_h, a, b, "non-finite h");
            else if (hv >= 0.0) flag(rep.turning_h, a, b, "h >= 0");
        }
    }
    if (rep.boundary_note.empty())
        rep.boundary_note = boundary_h_ok
            ? "h < 0 also holds on the b=0 boundary row"
            : "h sign condition fails on the b=0 boundary row (interior checked separately)";

    // analytic partials vs central differences on a coarse subgrid
    if (m.df_da || m.dh_da || m.dg_db) {
        for (std::size_t i = 0; i < 16 && rep.partials.pass; ++i) {
            double a = grid.a_lo + (double(i) + 0.5) * (grid.a_hi - grid.a_lo) / 16.0;
            for (std::size_t j = 0; j < 16 && rep.partials.pass; ++j) {
                double b = (double(j) + 0.5) * grid.b_hi / 16.0;
                auto check = [&](const Evaluator& analytic, const Evaluator& base,
                                 bool wrt_a, const char* which) {
                    if (!analytic) return;
                    double s = SlowFastModel::fd_step(wrt_a ? a : b);
                    double fd = wrt_a
                        ? (base(a + s, b, 0.0) - base(a - s, b, 0.0)) / (2.0 * s)
                        : (base(a, b + s, 0.0) - base(a, b - s, 0.0)) / (2.0 * s);
                    double an = analytic(a, b, 0.0);
                    double tol = 1e-6 * std::max({1.0, std::abs(an), std::abs(fd)});
                    if (std::abs(an - fd) > tol)
                        flag(rep.partials, a, b,
                             std::string(which) + " mismatch: analytic=" +
                                 std::to_string(an) + " fd=" + std::to_string(fd));
                };
                check(m.df_da, m.f, true, "df_da");
                check(m.dh_da, m.h, true, "dh_da");
                if (!m.tabulated_dg_db) check(m.dg_db, m.g, false, "dg_db");
            }
        }
    }

    // declared structure flags, verified numerically on a coarse subgrid
    for (std::size_t i = 0; i < 12 && rep.structure.pass; ++i) {
        double a = grid.a_lo + (double(i) + 0.5) * (grid.a_hi - grid.a_lo) / 12.0;
        for (std::size_t j = 0; j < 12 && rep.structure.pass; ++j) {
            double b = (double(j) + 0.5) * grid.b_hi / 12.0;
            if (m.flags.h_independent_of_a) {
                double h1 = m.h(a, b, 0.0);
                double h2 = m.h(grid.a_lo + 0.25 * (grid.a_hi - grid.a_lo), b, 0.0);
                if (std::abs(h1 - h2) > 1e-8 * std::max(1.0, std::abs(h1)))
                    flag(rep.structure, a, b, "h varies with a but h_independent_of_a is set");
            }
            if (m.flags.separable_fh) {
                // f(a,b)/a and h(a,b)/a must not depend on a
                double a2 = (a == m.a_bar) ? a + 0.1 : 0.5 * (a + grid.a_lo) - 0.01;
                if (std::abs(a) > 1e-12 && std::abs(a2) > 1e-12) {
                    double r1 = m.f(a, b, 0.0) / a, r2 = m.f(a2, b, 0.0) / a2;
                    if (std::abs(r1 - r2) > 1e-8 * std::max(1.0, std::abs(r1)))
                        flag(rep.structure, a, b, "f is not a-linear but separable_fh is set");
                    double q1 = m.h(a, b, 0.0) / a, q2 = m.h(a2, b, 0.0) / a2;
                    if (std::abs(q1 - q2) > 1e-8 * std::max(1.0, std::abs(q1)))
                        flag(rep.structure, a, b, "h is not a-linear but separable_fh is set");
                }
            }
            if (m.flags.g_factorizable) {
                if (!m.flags.phi || !m.flags.G) {
                    flag(rep.structure, a, b, "g_factorizable set without phi/G evaluators");
                } else {
                    double lhs = m.g(a, b, 0.0);
                    double rhs = m.flags.phi(b) * m.flags.G(a, b, 0.0);
                    if (std::abs(lhs - rhs) > 1e-8 * std::max(1.0, std::abs(lhs)))
                        flag(rep.structure, a, b, "g != phi(b)*G(a,b)");
                }
            }
        }
    }
    if (m.flags.g_factorizable && m.flags.phi && std::abs(m.flags.phi(0.0)) < 1e-12)
        flag(rep.structure, m.a_bar, 0.0, "phi(0) = 0 contradicts g_factorizable");

    return rep;
}

} // namespace slowfast
