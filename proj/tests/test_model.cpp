#include "doctest.h"

#include "slowfast/model.hpp"
#include "slowfast/models/toy.hpp"

using namespace slowfast;

TEST_CASE("toy model passes validation") {
    auto m = toy_model();
    auto rep = validate_model(m, {-2.0, 2.0, 1.0, 64, 64});
    CHECK(rep.ok());
    CHECK(rep.turning_g.pass);
}

TEST_CASE("sign violations are caught with first-violation coordinates") {
    auto m = toy_model();
    m.h = [](double a, double, double) { return a; }; // h > 0 for a > 0
    m.dh_da = [](double, double, double) { return 1.0; };
    auto rep = validate_model(m, {-2.0, 2.0, 1.0, 64, 64});
    CHECK(!rep.ok());
    CHECK(!rep.turning_h.pass);
    CHECK(rep.turning_h.a > 0.0);
}

TEST_CASE("g without a sign change at a_bar fails turning_g") {
    auto m = toy_model();
    m.g = [](double a, double, double) { return a + 5.0; }; // positive on grid
    m.dg_db = [](double, double, double) { return 0.0; };
    auto rep = validate_model(m, {-2.0, 2.0, 1.0, 64, 64});
    CHECK(!rep.turning_g.pass);
}

TEST_CASE("analytic/finite-difference partial mismatch is detected") {
    auto m = toy_model();
    m.df_da = [](double, double, double) { return 0.5; }; // f is constant
    auto rep = validate_model(m, {-2.0, 2.0, 1.0, 64, 64});
    CHECK(!rep.partials.pass);
}

TEST_CASE("wrong structure flags are rejected") {
    auto m = toy_model();
    m.flags.separable_fh = true; // f = 1 is not a-linear
    auto rep = validate_model(m, {-2.0, 2.0, 1.0, 64, 64});
    CHECK(!rep.structure.pass);
}

TEST_CASE("fd fallback partials are second order") {
    auto m = toy_model(ToyParams{0.0, 0.7});
    m.dg_db = nullptr;
    CHECK(m.Dg_db(0.3, 0.4, 0.0) == doctest::Approx(-0.7).epsilon(1e-8));
    CHECK(m.Dh_da(0.3, 0.4, 0.0) == doctest::Approx(0.0));
}
