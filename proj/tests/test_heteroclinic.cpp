#include "doctest.h"

#include <cmath>

#include "slowfast/heteroclinic.hpp"
#include "slowfast/models/toy.hpp"

using namespace slowfast;

TEST_CASE("symmetric toy orbit lands at the mirror point") {
    auto m = toy_model();
    auto orbit = compute_heteroclinic(m, 1.0);
    CHECK(orbit.a_alpha == doctest::Approx(1.0));
    CHECK(orbit.a_omega == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(orbit.peak_b == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(single_peaked(orbit));
}

TEST_CASE("orbit is insensitive to the seed offset") {
    auto m = toy_model();
    HetOptions o1, o2;
    o1.delta = 1e-8;
    o2.delta = 1e-9;
    auto a = compute_heteroclinic(m, 1.3, o1);
    auto b = compute_heteroclinic(m, 1.3, o2);
    CHECK(std::abs(a.a_omega - b.a_omega) < 1e-7);
}

TEST_CASE("backward run recovers the alpha point") {
    auto m = toy_model(ToyParams{0.0, 0.4});
    auto orbit = compute_heteroclinic(m, 1.1);
    double back = recover_alpha_backward(m, orbit.a_omega);
    CHECK(back == doctest::Approx(orbit.a_alpha).epsilon(1e-5));
}

TEST_CASE("omega map is monotone decreasing over the family") {
    auto m = toy_model(ToyParams{0.0, 0.2});
    std::vector<double> grid;
    for (int i = 0; i < 8; ++i) grid.push_back(0.5 + 0.2 * i);
    auto om = omega_map(m, grid);
    CHECK(om.monotone);
    for (const auto& e : om.entries) CHECK(e.ok);
}

TEST_CASE("a_alpha outside the repelling side is rejected") {
    auto m = toy_model();
    CHECK_THROWS_AS(compute_heteroclinic(m, -0.5), DomainError);
}

TEST_CASE("orbit escaping the a-window reports no connection") {
    auto m = toy_model();
    // sabotage: make g stay positive so b never falls back
    m.g = [](double a, double, double) { return 0.5 + 0.0 * a; };
    m.dg_db = nullptr;
    m.a_bar = 0.0;
    CHECK_THROWS_AS(compute_heteroclinic(m, 1.0), NumericError);
}
