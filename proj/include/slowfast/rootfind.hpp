#pragma once

#include <cmath>
#include <functional>
#include <limits>

#include "slowfast/errors.hpp"

namespace slowfast {

struct RootResult {
    double x = std::numeric_limits<double>::quiet_NaN();
    double fx = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool converged = false;
};

// Brent's method: bisection-safeguarded inverse quadratic interpolation.
// Requires f(a) and f(b) of opposite sign. Stops when the bracket width
// falls below xtol + 4*eps*|x| or |f| below ftol.
template <typename F>
RootResult brent(F&& f, double a, double b, double xtol = 1e-12,
                 double ftol = 0.0, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (!std::isfinite(fa) || !std::isfinite(fb))
        throw NumericError("brent: non-finite function value at bracket endpoint");
    if (fa == 0.0) return {a, fa, 0, true};
    if (fb == 0.0) return {b, fb, 0, true};
    if ((fa > 0.0) == (fb > 0.0))
        throw DomainError("brent: endpoints do not bracket a root");

    double c = a, fc = fa;
    double d = b - a, e = d;
    RootResult res;
    for (int it = 1; it <= max_iter; ++it) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a; fc = fa; d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double eps = std::numeric_limits<double>::epsilon();
        double tol = 2.0 * eps * std::abs(b) + 0.5 * xtol;
        double m = 0.5 * (c - b);
        if (std::abs(m) <= tol || fb == 0.0 || std::abs(fb) <= ftol) {
            res.x = b; res.fx = fb; res.iterations = it; res.converged = true;
            return res;
        }
        if (std::abs(e) < tol || std::abs(fa) <= std::abs(fb)) {
            d = e = m; // bisection
        } else {
            double s = fb / fa, p, q;
            if (a == c) { // secant
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else { // inverse quadratic
                double qq = fa / fc, r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q; else p = -p;
            if (2.0 * p < std::min(3.0 * m * q - std::abs(tol * q), std::abs(e * q))) {
                e = d; d = p / q;
            } else {
                d = e = m;
            }
        }
        a = b; fa = fb;
        b += (std::abs(d) > tol) ? d : (m > 0.0 ? tol : -tol);
        fb = f(b);
        if (!std::isfinite(fb))
            throw NumericError("brent: non-finite function value during iteration");
    }
    res.x = b; res.fx = fb; res.iterations = max_iter; res.converged = false;
    return res;
}

} // namespace slowfast
