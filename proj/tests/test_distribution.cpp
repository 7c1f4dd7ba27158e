#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "persistx/distribution.hpp"
#include "persistx/error.hpp"

using namespace persistx;

TEST_CASE("densities") {
    CHECK(InnovationDistribution::uniform(-1, 1).density(0.0) == 0.5);
    CHECK(InnovationDistribution::exponential().density(0.0) == 1.0);
    CHECK(InnovationDistribution::gaussian(1).density(0.0) == doctest::Approx(0.3989422804).epsilon(1e-10));
    CHECK(InnovationDistribution::uniform(-1, 1).density(2.0) == 0.0);
    CHECK(InnovationDistribution::exponential().density(-0.5) == 0.0);
    CHECK_THROWS_AS(InnovationDistribution::rademacher().density(0.0), RequestedDensityOfAtomicLaw);
    CHECK_FALSE(InnovationDistribution::rademacher().has_density());
}

TEST_CASE("distribution functions") {
    CHECK(InnovationDistribution::uniform(-1, 1).cdf(0.0) == 0.5);
    CHECK(InnovationDistribution::rademacher().cdf(0.0) == 0.5);
    CHECK(InnovationDistribution::exponential().cdf(1.0) == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-15));
    CHECK(InnovationDistribution::gaussian(2).cdf(2.0) == doctest::Approx(normal_cdf(1.0)).epsilon(1e-15));
}

TEST_CASE("normal quantile matches reference values") {
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-15));
    CHECK(normal_quantile(0.5) == 0.0);
    CHECK(normal_quantile(1e-10) == doctest::Approx(-6.361340902404056).epsilon(1e-14));
    for (double p : {1e-300, 1e-20, 0.001, 0.2, 0.7, 0.999999})
        CHECK(normal_cdf(normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
    CHECK_THROWS_AS(normal_quantile(1.5), InvalidArgument);
}

TEST_CASE("sampling respects the support and the mean") {
    RandomStream s(3, "test", 0);
    const auto u = InnovationDistribution::uniform(0, 1);
    const auto r = InnovationDistribution::rademacher();
    for (int i = 0; i < 10000; ++i) {
        const double x = u.sample(s);
        REQUIRE((x > 0.0 && x < 1.0));
        const double y = r.sample(s);
        REQUIRE((y == -1.0 || y == 1.0));
    }
    const auto e = InnovationDistribution::exponential();
    double sum = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) sum += e.sample(s);
    CHECK(std::abs(sum / n - 1.0) <= 0.005);
}

TEST_CASE("shell syntax") {
    CHECK(InnovationDistribution::parse("uniform:-1,1") == InnovationDistribution::uniform(-1, 1));
    CHECK(InnovationDistribution::parse("gaussian:2") == InnovationDistribution::gaussian(2));
    CHECK(InnovationDistribution::parse("gaussian") == InnovationDistribution::gaussian(1));
    CHECK(InnovationDistribution::parse("exponential") == InnovationDistribution::exponential());
    CHECK(InnovationDistribution::parse("rademacher") == InnovationDistribution::rademacher());
    CHECK_THROWS_AS(InnovationDistribution::parse("uniform:1"), InvalidArgument);
    CHECK_THROWS_AS(InnovationDistribution::parse("uniform:a,b"), InvalidArgument);
    CHECK_THROWS_AS(InnovationDistribution::parse("cauchy"), InvalidArgument);
    CHECK_THROWS_AS(InnovationDistribution::uniform(1, -1), InvalidArgument);
    CHECK_THROWS_AS(InnovationDistribution::gaussian(0), InvalidArgument);
}

TEST_CASE("tail bounds") {
    CHECK(InnovationDistribution::exponential().tail_bound(1e-10) == doctest::Approx(-std::log(1e-10)));
    CHECK(InnovationDistribution::gaussian(1).tail_bound(1e-10) == doctest::Approx(6.466951).epsilon(1e-6));
    CHECK(InnovationDistribution::uniform(-1, 3).tail_bound(1e-10) == 3.0);
}
