#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "slowfast/characteristics.hpp"
#include "slowfast/heteroclinic.hpp"
#include "slowfast/models/epidemic.hpp"

using namespace slowfast;

namespace {

EpidemicParams case1_params() { return EpidemicParams{}; } // defaults match

CenterManifoldTable small_table(std::size_t M = 60, std::size_t nt = 2500) {
    CmBuildOptions opt;
    opt.M = M;
    opt.nt = nt;
    opt.tol = {1e-9, 1e-12};
    return build_center_manifold(case1_params(), opt);
}

// residual of the S-equation of the limiting system on the tabulated
// manifold, sampled on a fixed (I, N) probe grid
double manifold_residual(const CenterManifoldTable& tab) {
    const auto& prm = tab.prm;
    double a = prm.a_comb();
    double total = 0.0;
    int n = 0;
    for (double N : {100.0, 150.0, 220.0, 300.0}) {
        for (double I : {0.2, 0.8, 2.0}) {
            CenterManifoldTable::Query q;
            try { q = tab.query(I, N); } catch (const DomainError&) { continue; }
            if (q.clamped) continue;
            double g = prm.g_inc(q.S, N);
            double dI = (g - a) * I, dN = -prm.alpha * I;
            double res = prm.D * N - g * I - (prm.D + prm.p) * q.S -
                         (q.dSdI * dI + q.dSdN * dN);
            total += std::abs(res);
            ++n;
        }
    }
    REQUIRE(n > 6);
    return total / n;
}

} // namespace

TEST_CASE("threshold N0 and its residual contract") {
    double N0 = epidemic_N0(case1_params());
    CHECK(N0 == doctest::Approx(52.395).epsilon(2e-4));
    auto prm = case1_params();
    CHECK(std::abs(prm.g_inc(prm.S_line(N0), N0) - prm.a_comb()) < 1e-10);
}

TEST_CASE("unstable eigenvector satisfies the linearization") {
    auto prm = case1_params();
    double N = 200.0;
    auto v = epidemic_unstable_eigvec(prm, N);
    double g = prm.g_inc(prm.S_line(N), N);
    double mu = g - prm.a_comb();
    // J rows at (S_line(N), 0, N) for the limiting system
    double r0 = -(prm.D + prm.p) * v[0] - g * v[1] + prm.D * v[2];
    double r1 = mu * v[1];
    double r2 = -prm.alpha * v[1];
    CHECK(r0 == doctest::Approx(mu * v[0]).epsilon(1e-12));
    CHECK(r1 == doctest::Approx(mu * v[1]));
    CHECK(r2 == doctest::Approx(mu * v[2]).epsilon(1e-12));
    CHECK_THROWS_AS(epidemic_unstable_eigvec(prm, 40.0), DomainError);
}

TEST_CASE("deformed profile is positive and the deformation is local") {
    auto prm = case1_params();
    prm.profile = EpidemicProfile::deformed;
    double min_f = 1e300;
    for (double N = 1.0; N < 399.5; N += 0.5) {
        min_f = std::min(min_f, prm.f_slow(N));
        if (N > prm.c3 + 10.0 / prm.c2) {
            auto base = case1_params();
            CHECK(std::abs(prm.f_slow(N) - base.f_slow(N)) < 1e-3 * base.f_slow(N));
        }
    }
    CHECK(min_f > 0.0);
    // at the dip center the drift loses (almost) the full deformation depth
    auto base = case1_params();
    CHECK(base.f_slow(prm.c3) - prm.f_slow(prm.c3) ==
          doctest::Approx(prm.c1).epsilon(1e-12));
}

TEST_CASE("center-manifold table: line values, coverage, refinement") {
    auto tab = small_table();
    auto prm = tab.prm;
    // equilibrium-line boundary behavior
    for (double N : {70.0, 150.0, 320.0}) {
        auto q = tab.query(1e-9, N);
        CHECK(q.S == doctest::Approx(prm.S_line(N)).epsilon(1e-4));
    }
    // interior: S~ deviates from the line where I is large
    auto qi = tab.query(3.0, 250.0);
    CHECK(std::abs(qi.S - prm.S_line(250.0)) > 0.5);
    CHECK_THROWS_AS(tab.query(5000.0, 200.0), DomainError);

    double res_coarse = manifold_residual(tab);
    auto fine = small_table(120, 5000);
    double res_fine = manifold_residual(fine);
    CHECK(res_fine < res_coarse);
    CHECK(res_fine < 0.5);
}

TEST_CASE("table CSV round trip preserves queries") {
    auto tab = small_table(50, 1200);
    auto path = std::filesystem::temp_directory_path() / "cm_table_test.csv";
    tab.save_csv(path.string());
    auto back = CenterManifoldTable::load_csv(path.string(), tab.prm);
    for (double N : {90.0, 180.0, 330.0})
        for (double I : {0.3, 3.0, 12.0}) {
            CenterManifoldTable::Query a, b;
            try {
                a = tab.query(I, N);
                b = back.query(I, N);
            } catch (const DomainError&) { continue; }
            CHECK(a.S == doctest::Approx(b.S).epsilon(1e-12));
            CHECK(a.dSdI == doctest::Approx(b.dSdI).epsilon(1e-12));
        }
    std::filesystem::remove(path);
}

TEST_CASE("reduced model structure and native lambda agree with generic") {
    auto tab = small_table();
    auto m = epidemic_reduced(tab.prm, tab);
    CHECK(m.flags.h_independent_of_a);
    CHECK(m.a_bar == doctest::Approx(52.395).epsilon(2e-4));
    CHECK(m.h(100.0, 3.0, 0.0) == doctest::Approx(-tab.prm.alpha));

    auto orbit = compute_heteroclinic(m, 200.0);
    CHECK(orbit.a_omega < m.a_bar);
    auto vals = evaluate_characteristics(m, orbit);
    CHECK(vals.lambda_form == LambdaForm::h_independent);
    double native = epidemic_lambda(tab.prm, tab, orbit);
    CHECK(std::abs(native - vals.lambda) <
          1e-6 * std::abs(native) + vals.lambda_err + 1e-9);
}

TEST_CASE("full system keeps the I = 0 plane invariant") {
    auto prm = case1_params();
    auto rhs = epidemic_full(prm, 1e-3);
    auto path = integrate<3>(rhs, {30.0, 0.0, 100.0}, 0.0, 500.0, {}, {});
    for (const auto& u : path.y) CHECK(u[1] == 0.0);
}
