#include "doctest.h"

#include <cmath>

#include "slowfast/models/toy.hpp"
#include "slowfast/verification.hpp"

using namespace slowfast;

TEST_CASE("entry-exit on the symmetric toy: predicted exit mirrors the entry") {
    // the symmetric toy is time-reversible, so the exact gap is zero and the
    // measurement is limited by solver error, which grows with the 1/eps
    // passage length; keep tolerance proportional to eps
    auto m = toy_model();
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {1e-2, 1e-3}) {
        VerifyOptions vo;
        vo.tol = {1e-9 * (eps / 1e-2), 1e-12 * (eps / 1e-2)};
        auto res = entry_exit_check(m, eps, -1.0, 0.02, vo);
        CHECK(res.a_exit_predicted == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(res.gap < 1e-8);
        CHECK(res.gap < prev);
        prev = res.gap;
    }
}

TEST_CASE("entry point on the repelling side is rejected") {
    auto m = toy_model();
    CHECK_THROWS_AS(entry_exit_check(m, 1e-2, 0.5, 0.02), DomainError);
}

TEST_CASE("section seed interpolates the upward crossing") {
    auto m = toy_model();
    auto orbit = compute_heteroclinic(m, 1.0);
    double a = section_seed(orbit, 0.1);
    // conic b = (1 - a^2)/2 = 0.1 rising at a = +sqrt(0.8)
    CHECK(a == doctest::Approx(std::sqrt(0.8)).epsilon(1e-3));
    CHECK_THROWS_AS(section_seed(orbit, 10.0), DomainError);
}

TEST_CASE("distance to the singular cycle is zero on the cycle itself") {
    auto m = toy_model();
    auto orbit = compute_heteroclinic(m, 1.0);
    std::vector<State<2>> pts(orbit.path.y.begin(), orbit.path.y.end());
    CHECK(distance_to_singular_cycle(pts, orbit) < 1e-9);
    std::vector<State<2>> off{{0.0, 0.6}};
    CHECK(distance_to_singular_cycle(off, orbit) == doctest::Approx(0.1).epsilon(1e-3));
}

TEST_CASE("return map round trip on a mildly perturbed toy") {
    // gb > 0 gives lambda < 0: the full system near the singular cycle is
    // recurrent for moderate eps
    auto m = toy_model(ToyParams{0.0, 0.5});
    auto orbit = compute_heteroclinic(m, 1.4);
    double delta1 = 0.05 * orbit.peak_b;
    double a_in = section_seed(orbit, delta1);
    auto r = return_map(m, 0.05, delta1, a_in);
    REQUIRE(r.ok);
    CHECK(r.transit_time > 0.0);
    CHECK(std::isfinite(r.a_out));
}
