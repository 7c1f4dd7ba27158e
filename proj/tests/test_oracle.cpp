#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "persistx/error.hpp"
#include "persistx/oracle.hpp"

using namespace persistx;

namespace {
constexpr double kPi = std::numbers::pi;
const auto kExp = InnovationDistribution::exponential();
}

TEST_CASE("AR(1) uniform exponent") {
    CHECK(ar1_uniform_exponent(1, 1) == doctest::Approx(1 / kPi).epsilon(1e-15));
    CHECK(ar1_uniform_exponent(1, 3) == doctest::Approx(6 / (4 * kPi)).epsilon(1e-15));
    CHECK(ar1_uniform_exponent(1, 1e-14) < 1e-13);
}

TEST_CASE("AR(1) exponential probabilities") {
    const auto iid = InitialDistribution::iid(kExp);
    CHECK(ar1_exponential_pn(-1, 5, iid) == doctest::Approx(0.03125).epsilon(1e-15));
    CHECK(ar1_exponential_pn(-1, 0, iid) == 1.0);
    // From Z_0 = 0 the first step is Z_1 = xi_1 >= 0, so p_1 = 1 and p_2 = 1/2.
    const auto zero = InitialDistribution::point_mass({0.0});
    CHECK(ar1_exponential_pn(-1, 1, zero) == 1.0);
    CHECK(ar1_exponential_pn(-1, 2, zero) == 0.5);
    CHECK(ar1_exponential_pn(-3, 4, iid) / ar1_exponential_pn(-3, 3, iid) == doctest::Approx(0.25));
    CHECK(ar1_exponential_exponent(-3) == 0.25);
    CHECK_THROWS_AS(ar1_exponential_pn(-1, 2, InitialDistribution::iid(InnovationDistribution::uniform(0, 1))),
                    UnsupportedInitialLaw);
}

TEST_CASE("MA(1) uniform exponent") {
    CHECK(ma1_uniform_exponent(1, 1) == doctest::Approx(2 / kPi).epsilon(1e-12));
    CHECK(ma1_uniform_exponent(3, 1) == doctest::Approx(1 / kPi).epsilon(1e-15));
    const double root = ma1_uniform_root(1, 3);
    CHECK(std::abs(ma1_uniform_residual(root, 1, 3)) <= 1e-10);
    CHECK(root == doctest::Approx(0.8993316389440023).epsilon(1e-12));
    CHECK(ma1_uniform_exponent(1, 3) == root);
    CHECK(std::abs(ma1_uniform_root(1, 1) - 2 / kPi) <= 1e-10);
    // Largest root: no other sign change of the residual in (root, 1).
    for (double l = root + 1e-3; l < 1.0; l += 1e-3) CHECK(ma1_uniform_residual(l, 1, 3) * ma1_uniform_residual(root + 1e-4, 1, 3) > 0);
}

TEST_CASE("symmetric series") {
    CHECK(std::abs(ma1_symmetric_series(1, 50) - 0.5) <= 1e-6);
    CHECK(std::abs(ma1_symmetric_series(2, 50) - 1.0 / 3.0) <= 1e-6);
    CHECK(std::abs(ma1_symmetric_series(2, 200) - 1.0 / 3.0) <= 1e-6);
    CHECK(std::abs(ma1_symmetric_series(3, 200) - 5.0 / 24.0) <= 1e-6);
    CHECK(std::abs(ma1_symmetric_series(41, 200) / ma1_symmetric_series(40, 200) - 2 / kPi) <= 1e-4);
}

TEST_CASE("Rademacher closed forms") {
    CHECK(rademacher_pn(1, SurvivalConvention::StrictlyPositive) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(rademacher_pn(1, SurvivalConvention::NonNegative) == doctest::Approx(0.625).epsilon(1e-15));
    for (auto c : {SurvivalConvention::NonNegative, SurvivalConvention::StrictlyPositive})
        for (int n = 0; n <= 40; ++n) {
            const double a = rademacher_pn(n, c), b = rademacher_pn_transfer(n, c);
            CHECK(std::abs(a - b) <= 1e-12 * b);
        }
    CHECK(rademacher_exponent(SurvivalConvention::StrictlyPositive) == 0.5);
    CHECK(rademacher_exponent(SurvivalConvention::NonNegative) == doctest::Approx((1 + std::sqrt(5.0)) / 4));
}

TEST_CASE("MA(1) exponential") {
    CHECK(ma1_exponential_exponent(-0.5) == 0.5);
    CHECK(ma1_exponential_exponent(-0.9) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(ma1_exponential_exponent(-1e-9) == doctest::Approx(1.0));
    CHECK_THROWS_AS(ma1_exponential_exponent(0.5), InvalidArgument);
    CHECK(ma1_exponential_eigenfunction(-0.5, -1.0) == 1.0);
    CHECK(ma1_exponential_eigenfunction(-0.5, 2.0) == doctest::Approx(std::exp(-2.0)));
}

TEST_CASE("degenerate MA factorial law") {
    CHECK(degenerate_factorial_pn(0) == 0.5);
    CHECK(degenerate_factorial_pn(1) == doctest::Approx(1.0 / 6).epsilon(1e-15));
    CHECK(degenerate_factorial_pn(4) == doctest::Approx(1.0 / 720).epsilon(1e-15));
    double f = 1.0;
    for (int k = 2; k <= 32; ++k) f *= k;
    CHECK(degenerate_factorial_pn(30) == doctest::Approx(1.0 / f).epsilon(1e-12));
}

TEST_CASE("regimes and characteristic roots") {
    const auto g = InnovationDistribution::gaussian(1);
    CHECK(classify_regime(MAModel({-1.0}, g)).regime == Regime::MADegenerate);
    CHECK(classify_regime(MAModel({0.5, -1.5}, g)).regime == Regime::MADegenerate);
    CHECK(classify_regime(MAModel({1.0}, g)).regime == Regime::MANondegenerate);
    const auto super = classify_regime(ARModel({1.2}, g, InitialDistribution::iid(g)));
    CHECK(super.regime == Regime::ARSupercritical);
    REQUIRE(super.rho);
    CHECK(*super.rho == 1.2);
    CHECK(classify_regime(ARModel({0.5, 0.25}, g, InitialDistribution::iid(g))).regime == Regime::ARContractive);
    CHECK(classify_regime(ARModel({-2.0}, g, InitialDistribution::iid(g))).regime == Regime::ARNonpositive);
    CHECK(classify_regime(ARModel({1.5, -2.0}, g, InitialDistribution::iid(g))).regime == Regime::ARUnsupported);
    const double rho = characteristic_root(std::vector<double>{1.0, 0.5});
    CHECK(rho == doctest::Approx((1 + std::sqrt(3.0)) / 2).epsilon(1e-14));
}

TEST_CASE("log-concave monotone shift") {
    for (const auto& law : {InnovationDistribution::gaussian(1), InnovationDistribution::uniform(-1, 2), kExp})
        CHECK(logconcave_min_gap(law, {0.1, 0.5, 1.0}, {0.0, 0.5, 1.0, 2.0}) >= -1e-9);
}

TEST_CASE("oracle matching") {
    const auto u = InnovationDistribution::uniform(-1, 1);
    const auto c = match_oracle(ARModel({-1.0}, u, InitialDistribution::iid(u)));
    REQUIRE(c);
    CHECK(case_tag(*c) == "ar1-uniform");
    CHECK(oracle_exponent(*c) == doctest::Approx(1 / kPi));
    CHECK_FALSE(match_oracle(ARModel({0.3}, u, InitialDistribution::iid(u))));
    const auto d = match_oracle(MAModel({-1.0}, u));
    REQUIRE(d);
    CHECK(oracle_exponent(*d) == 0.0);
    const auto table = oracle_pn_table(*d, 4);
    CHECK(table.size() == 5);
    CHECK(table[1] == doctest::Approx(1.0 / 6));
    const auto iid = match_oracle(MAModel({0.0}, kExp));
    REQUIRE(iid);
    CHECK(oracle_exponent(*iid) == 1.0);
}
