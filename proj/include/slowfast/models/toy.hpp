#pragma once

// Minimal closed-form test model: f = 1, h = -1, g = a - g0 - gb*b.
// With gb = 0 the fast orbits are the conics b = b0 - (a-g0)^2/2, landings
// are mirror-symmetric and chi vanishes identically (the degenerate case).

#include "slowfast/model.hpp"

namespace slowfast {

struct ToyParams {
    double g0 = 0.0; // turning point
    double gb = 0.0; // b-dependence of g; 0 = symmetric/degenerate
    double a_min = -10.0, a_max = 10.0, b_max = 5.0;
};

inline SlowFastModel toy_model(const ToyParams& prm = {}) {
    SlowFastModel m;
    m.name = "toy";
    m.a_min = prm.a_min;
    m.a_max = prm.a_max;
    m.a_bar = prm.g0;
    m.f = [](double, double, double) { return 1.0; };
    m.df_da = [](double, double, double) { return 0.0; };
    m.h = [](double, double, double) { return -1.0; };
    m.dh_da = [](double, double, double) { return 0.0; };
    m.g = [prm](double a, double b, double) { return a - prm.g0 - prm.gb * b; };
    m.dg_db = [prm](double, double, double) { return -prm.gb; };
    m.flags.h_independent_of_a = true;
    return m;
}

} // namespace slowfast
