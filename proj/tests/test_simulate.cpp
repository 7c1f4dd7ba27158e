#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "persistx/error.hpp"
#include "persistx/json_io.hpp"
#include "persistx/simulate.hpp"

using namespace persistx;

namespace {

const auto kUnif = InnovationDistribution::uniform(-1, 1);
const auto kGauss = InnovationDistribution::gaussian(1);
const auto kExp = InnovationDistribution::exponential();

bool within_4se(const HorizonEstimate& h, double p) { return std::abs(h.p_hat - p) <= 4.0 * h.se; }

PersistenceEstimate synthetic(const std::vector<int>& ns, auto p_of_n) {
    PersistenceEstimate e;
    for (int n : ns) {
        const double p = p_of_n(n);
        e.table.push_back({n, p, std::log(p), 1e-3 * p, 1000});
    }
    return e;
}

} // namespace

TEST_CASE("initial laws") {
    RandomStream s(1, "t", 0);
    CHECK(sample_initial(InitialDistribution::point_mass({1.5}), 1, s) == std::vector<double>{1.5});
    const auto two = sample_initial(InitialDistribution::iid(InnovationDistribution::uniform(0, 1)), 2, s);
    REQUIRE(two.size() == 2);
    for (double x : two) CHECK((x > 0 && x < 1));
    CHECK_THROWS_AS(sample_initial(InitialDistribution::point_mass({1, 2}), 1, s), DimensionMismatch);

    const auto st = InitialDistribution::stationary_ar1_gaussian(0.0);
    double sum2 = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
        const double x = sample_initial(st, 1, s)[0];
        sum2 += x * x;
    }
    CHECK(std::abs(sum2 / n - 1.0) <= 0.01);
}

TEST_CASE("model construction rejects bad inputs") {
    CHECK_THROWS_AS(ARModel({}, kGauss, InitialDistribution::iid(kGauss)), InvalidArgument);
    CHECK_THROWS_AS(ARModel({0.5}, kGauss, InitialDistribution::point_mass({1, 1})), DimensionMismatch);
    CHECK_THROWS_AS(MAModel({std::nan("")}, kGauss), InvalidArgument);
}

TEST_CASE("AR recursion one step") {
    const double x0 = 0.7;
    ARModel m({-1.0}, kUnif, InitialDistribution::point_mass({x0}));
    RandomStream s1(9, "t", 0), s2(9, "t", 0);
    const auto path = simulate_ar_path(m, 1, s1);
    const double xi = kUnif.sample(s2);
    CHECK(path[0] == x0);
    CHECK(path[1] == -x0 + xi);
}

TEST_CASE("AR(2) deterministic skeleton") {
    const double eps = 1e-9;
    ARModel m({0.5, 0.25}, InnovationDistribution::uniform(-eps, eps), InitialDistribution::point_mass({1, 1}));
    RandomStream s(1, "t", 0);
    const auto path = simulate_ar_path(m, 2, s);
    CHECK(std::abs(path[2] - 0.75) <= eps);
    CHECK_THROWS_AS(simulate_ar_path(m, 0, s), InvalidArgument);
}

TEST_CASE("MA with zero coefficient reproduces the innovations") {
    MAModel m({0.0}, kGauss);
    RandomStream s1(5, "t", 0), s2(5, "t", 0);
    const auto path = simulate_ma_path(m, 10, s1);
    kGauss.sample(s2);  // xi_{-1}
    for (int i = 0; i <= 10; ++i) CHECK(path[static_cast<std::size_t>(i)] == kGauss.sample(s2));
}

TEST_CASE("crude estimates of exact probabilities") {
    SUBCASE("AR(1) exponential, one step") {
        ARModel m({-1.0}, kExp, InitialDistribution::iid(kExp));
        const auto e = estimate_crude(m, {1}, 1000000, 11);
        CHECK(within_4se(e.table[0], 0.5));
    }
    SUBCASE("Gaussian pair sums, two constraints") {
        MAModel m({1.0}, kGauss);
        const auto e = estimate_crude(m, {1}, 1000000, 12);
        CHECK(within_4se(e.table[0], 1.0 / 3.0));
    }
    SUBCASE("independent uniform values") {
        ARModel m({0.0}, kUnif, InitialDistribution::iid(kUnif));
        const auto e = estimate_crude(m, {3}, 1000000, 13);
        CHECK(within_4se(e.table[0], 0.0625));
    }
}

TEST_CASE("crude counts are nested and SE is binomial") {
    MAModel m({0.5}, kGauss);
    const auto e = estimate_crude(m, horizon_range(20), 50000, 3);
    for (std::size_t i = 1; i < e.table.size(); ++i) CHECK(e.table[i].count <= e.table[i - 1].count);
    const auto& h = e.table[4];
    CHECK(h.se == doctest::Approx(std::sqrt(h.p_hat * (1 - h.p_hat) / 50000)));
}

TEST_CASE("crude estimator reports total extinction") {
    ARModel m({0.0}, InnovationDistribution::uniform(-2, -1), InitialDistribution::iid(kUnif));
    CHECK_THROWS_AS(estimate_crude(m, {1, 2}, 1000, 1), AllPathsDied);
}

TEST_CASE("splitting reaches small probabilities") {
    ARModel m({-1.0}, kExp, InitialDistribution::iid(kExp));
    const auto e = estimate_splitting(m, horizon_range(100), 100000, 21);
    CHECK(std::abs(e.table.back().log_p_hat / 100 - std::log(0.5)) <= 0.01);
    CHECK(e.step_fractions.size() == 101);
}

TEST_CASE("splitting population extinction is an error") {
    ARModel m({0.0}, InnovationDistribution::uniform(-2, -1), InitialDistribution::point_mass({1.0}));
    CHECK_THROWS_AS(estimate_splitting(m, {1, 2}, 1000, 1), PopulationExtinct);
}

TEST_CASE("estimates do not depend on the thread count") {
    const ProcessModel models[] = {ARModel({-0.5, 0.3}, kGauss, InitialDistribution::iid(kGauss)),
                                   MAModel({1.0, -0.4}, kUnif)};
    for (const auto& m : models) {
        const auto c1 = dump(to_json(estimate_crude(m, horizon_range(25), 30000, 77, 1)));
        const auto s1 = dump(to_json(estimate_splitting(m, horizon_range(25), 5000, 77, 1)));
        for (unsigned t : {2u, 3u, 8u}) {
            CHECK(dump(to_json(estimate_crude(m, horizon_range(25), 30000, 77, t))) == c1);
            CHECK(dump(to_json(estimate_splitting(m, horizon_range(25), 5000, 77, t))) == s1);
        }
        CHECK(dump(to_json(estimate_crude(m, horizon_range(25), 30000, 78, 1))) != c1);
    }
}

TEST_CASE("exponent fit on synthetic tables") {
    SUBCASE("exact log-linear data") {
        const auto e = synthetic(horizon_range(30), [](int n) { return 0.3 * std::pow(0.7, n); });
        const auto f = fit_exponent(e, 10, 29);
        CHECK(std::abs(f.lambda - 0.7) <= 1e-12);
    }
    SUBCASE("powers of one half") {
        const auto e = synthetic(horizon_range(20), [](int n) { return std::pow(0.5, n); });
        CHECK(fit_exponent(e, 0, 19).lambda == doctest::Approx(0.5).epsilon(1e-12));
    }
    SUBCASE("factorial decay has no positive exponent") {
        const auto e = synthetic(horizon_range(30), [](int n) { return std::exp(-std::lgamma(n + 3.0)); });
        double prev = 1.0;
        for (int shift = 0; shift <= 10; shift += 5) {
            const auto f = fit_exponent(e, static_cast<std::size_t>(9 + shift), static_cast<std::size_t>(19 + shift));
            CHECK(f.lambda < 0.1);
            CHECK(f.lambda < prev);
            prev = f.lambda;
        }
    }
    SUBCASE("windows need two points and positive estimates") {
        auto e = synthetic({1, 2, 3}, [](int n) { return std::pow(0.5, n); });
        CHECK_THROWS_AS(fit_exponent(e, 1, 1), InvalidArgument);
        e.table[2].p_hat = 0.0;
        e.table[2].log_p_hat = -INFINITY;
        CHECK_THROWS_AS(fit_exponent(e, 0, 2), NonPositiveProbabilityInWindow);
    }
}

TEST_CASE("default window is the last half of the usable prefix") {
    auto e = synthetic(horizon_range(10), [](int n) { return std::pow(0.5, n); });
    e.table[8].count = 3;
    const auto w = default_window(e, 25);
    REQUIRE(w);
    CHECK(w->first == 4);
    CHECK(w->second == 7);
}

TEST_CASE("estimator tags") {
    CHECK(parse_estimator("crude") == Estimator::Crude);
    CHECK(parse_estimator("splitting") == Estimator::Splitting);
    CHECK_THROWS_AS(parse_estimator("importance"), InvalidArgument);
}
