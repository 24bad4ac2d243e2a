#include "doctest.h"

#include <cmath>

#include "slowfast/characteristics.hpp"
#include "slowfast/integrator.hpp"
#include "slowfast/models/chemostat.hpp"

using namespace slowfast;

namespace {
ChemostatParams example_params() { return make_chemostat_holling2(10, 1, 1, 1, 1.5, 3); }
}

TEST_CASE("isocline values and parameter checks") {
    auto prm = example_params();
    CHECK(prm.ybar() == doctest::Approx(10.0 / 3.0).epsilon(1e-14));
    CHECK(prm.F(0.0) == doctest::Approx(prm.ybar()).epsilon(1e-12));
    CHECK(std::abs(prm.F(10.0)) < 1e-12);

    auto bad = prm;
    bad.S0 = -1.0;
    CHECK_THROWS_AS(bad.check(), DomainError);
}

TEST_CASE("reduced model passes validation") {
    auto prm = example_params();
    auto m = chemostat_reduced(prm);
    CHECK(m.a_bar == doctest::Approx(-10.0 / 3.0));
    auto rep = validate_model(m, {m.a_min, m.a_max, 10.5, 200, 200});
    CHECK(rep.ok());
}

TEST_CASE("one-hump condition holds for Holling II") {
    auto prm = example_params();
    auto res = one_hump_check(prm);
    CHECK(res.one_hump);
    CHECK(res.x_hat > 0.0);
    CHECK(res.x_hat < 10.0);
    CHECK(std::abs(prm.F_prime(res.x_hat)) < 1e-9);
}

TEST_CASE("orbit endpoints at the frozen root location") {
    auto prm = example_params();
    auto m = chemostat_reduced(prm);
    auto orbit = chemostat_orbit(m, prm, 6.9546);
    CHECK(-orbit.a_alpha == doctest::Approx(0.60078).epsilon(2e-3));
    CHECK(-orbit.a_omega == doctest::Approx(9.96168).epsilon(2e-3));
    CHECK(orbit.peak_b == doctest::Approx(6.9546).epsilon(1e-5));
    CHECK(single_peaked(orbit));
}

TEST_CASE("chi forms agree and vanish at the root") {
    auto prm = example_params();
    auto m = chemostat_reduced(prm);
    auto orbit = chemostat_orbit(m, prm, 6.9546);
    auto native = chemostat_chi(prm, orbit);
    CHECK(native.endpoint_form == doctest::Approx(native.psi_form).epsilon(1e-10));
    CHECK(std::abs(native.endpoint_form) < 2e-3);

    // model-native vs generic under the (-y, x) role mapping: exact factor
    // -c*(rho*m + p'(0)) = -3
    auto [chi_gen, err] = chi_endpoint(m, orbit);
    CHECK(chi_gen == doctest::Approx(-3.0 * native.endpoint_form).epsilon(1e-9));

    double line = chemostat_chi_line(prm, orbit);
    CHECK(std::abs(line - native.endpoint_form) < 1e-5);
}

TEST_CASE("chi is positive left of the hump and diverges near the corner") {
    auto prm = example_params();
    auto m = chemostat_reduced(prm);
    auto hump = one_hump_check(prm);
    auto low = chemostat_orbit(m, prm, 0.9 * hump.x_hat);
    CHECK(chemostat_chi(prm, low).endpoint_form > 0.0);
    double prev = 0.0;
    for (double x0 : {9.0, 9.5, 9.8}) {
        double c = chemostat_chi(prm, chemostat_orbit(m, prm, x0)).endpoint_form;
        CHECK(c < prev);
        prev = c;
    }
}

TEST_CASE("lambda at the root is negative and matches the generic value") {
    auto prm = example_params();
    auto m = chemostat_reduced(prm);
    auto orbit = chemostat_orbit(m, prm, 6.9546);
    double native = chemostat_lambda(prm, orbit);
    CHECK(native == doctest::Approx(-3.360).epsilon(0.02));
    auto vals = evaluate_characteristics(m, orbit);
    CHECK(vals.lambda_form == LambdaForm::separable_fh);
    CHECK(std::abs(native - vals.lambda) <
          1e-6 * std::abs(native) + vals.lambda_err);
    CHECK(std::abs(vals.lambda - vals.lambda_general_value) <
          2.0 * vals.lambda_err + 1e-8);
}

TEST_CASE("full 3-D system: simplex attracts at rate eps") {
    auto prm = example_params();
    double eps = 0.5;
    auto rhs = chemostat_full(prm, eps);
    IntegratorOptions opt;
    opt.tol = {1e-10, 1e-13};
    auto path = integrate<3>(rhs, {6.0, 1.0, 10.0}, 0.0, 8.0, {}, opt);
    auto defect = [&](const State<3>& u) {
        return u[0] + prm.rho * u[1] + prm.c * prm.rho * u[2] - prm.S0;
    };
    double d0 = defect(path.y.front());
    for (std::size_t i = 0; i < path.t.size(); ++i)
        CHECK(defect(path.y[i]) ==
              doctest::Approx(d0 * std::exp(-eps * path.t[i])).epsilon(1e-6));
}

TEST_CASE("prey-free dynamics: nutrient relaxes to the inflow level") {
    auto prm = example_params();
    auto rhs = chemostat_full(prm, 0.3);
    auto path = integrate<3>(rhs, {2.0, 0.0, 0.0}, 0.0, 60.0, {}, {});
    CHECK(path.back()[0] == doctest::Approx(10.0).epsilon(1e-6));
    CHECK(path.back()[1] == 0.0);
}
