#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "persistx/error.hpp"
#include "persistx/operator.hpp"

using namespace persistx;

namespace {

const auto kUnif = InnovationDistribution::uniform(-1, 1);
const auto kGauss = InnovationDistribution::gaussian(1);
const auto kExp = InnovationDistribution::exponential();

double integrate(const AxisRule& r, auto f) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * f(r.nodes[i]);
    return s;
}

double dense_spectral_radius(const DiscretizedOperator& op) {
    const auto d = op.to_dense();
    const auto n = static_cast<Eigen::Index>(op.size());
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> a(d.data(), n, n);
    const Eigen::MatrixXd m = a;
    return m.eigenvalues().cwiseAbs().maxCoeff();
}

} // namespace

TEST_CASE("axis rules") {
    const auto gl = make_axis(0, 1, 2, QuadratureScheme::GaussLegendre);
    CHECK(gl.nodes[0] == doctest::Approx(0.2113249).epsilon(1e-7));
    CHECK(gl.nodes[1] == doctest::Approx(0.7886751).epsilon(1e-7));
    CHECK(gl.weights[0] == doctest::Approx(0.5));
    CHECK(gl.weights[1] == doctest::Approx(0.5));

    const auto mid = make_axis(0, 1, 4, QuadratureScheme::Midpoint);
    CHECK(mid.nodes == std::vector<double>{0.125, 0.375, 0.625, 0.875});
    for (double w : mid.weights) CHECK(w == 0.25);

    const auto big = make_axis(-2, 3, 40, QuadratureScheme::GaussLegendre);
    CHECK(integrate(big, [](double x) { return std::pow(x, 79); }) ==
          doctest::Approx((std::pow(3.0, 80) - std::pow(-2.0, 80)) / 80).epsilon(1e-12));
    CHECK(big.edges.front() == -2.0);
    CHECK(big.edges.back() == doctest::Approx(3.0).epsilon(1e-14));
    for (std::size_t i = 0; i < big.size(); ++i) CHECK((big.edges[i] < big.nodes[i] && big.nodes[i] < big.edges[i + 1]));

    CHECK_THROWS_AS(make_axis(1, 0, 4, QuadratureScheme::Midpoint), InvalidArgument);
    CHECK(build_grid(0, 1, 5, 3, QuadratureScheme::Midpoint).state_count() == 125);
}

TEST_CASE("interval weights") {
    const auto ax = make_axis(0, 1, 30, QuadratureScheme::GaussLegendre);
    const double c1 = 0.31, c2 = 0.77;
    for (auto corr : {CutCorrection::None, CutCorrection::CellFraction, CutCorrection::MomentMatched}) {
        const auto w = interval_weights(ax, c1, c2, corr);
        for (double x : w) CHECK(x >= 0.0);
    }
    const auto w = interval_weights(ax, c1, c2, CutCorrection::MomentMatched);
    for (int deg = 0; deg <= 2; ++deg) {
        double s = 0.0;
        for (std::size_t i = 0; i < ax.size(); ++i) s += w[i] * std::pow(ax.nodes[i], deg);
        CHECK(s == doctest::Approx((std::pow(c2, deg + 1) - std::pow(c1, deg + 1)) / (deg + 1)).epsilon(1e-13));
    }
    const auto frac = interval_weights(ax, c1, c2, CutCorrection::CellFraction);
    double total = 0.0;
    for (double x : frac) total += x;
    CHECK(total == doctest::Approx(c2 - c1).epsilon(1e-14));

    const auto all = interval_weights(ax, -5, 5, CutCorrection::MomentMatched);
    for (std::size_t i = 0; i < ax.size(); ++i) CHECK(all[i] == ax.weights[i]);
    const auto none = interval_weights(ax, 2, 3, CutCorrection::MomentMatched);
    for (double x : none) CHECK(x == 0.0);
}

TEST_CASE("independent innovations give a rank-one operator") {
    ARModel m({0.0}, kUnif, InitialDistribution::iid(kUnif));
    OperatorSettings st;
    st.truncation = 1.0;
    CHECK(std::abs(operator_exponent(m, st).lambda - 0.5) <= 1e-10);

    ARModel g({0.0}, kGauss, InitialDistribution::iid(kGauss));
    st.truncation = 2.0;
    CHECK(std::abs(operator_exponent(g, st).lambda - (normal_cdf(2.0) - 0.5)) <= 1e-10);
}

TEST_CASE("closed-form exponents") {
    OperatorSettings st;
    SUBCASE("AR(1) uniform") {
        ARModel m({-1.0}, kUnif, InitialDistribution::iid(kUnif));
        const auto r = operator_exponent(m, st);
        CHECK(std::abs(r.lambda - 1 / std::numbers::pi) <= 1e-3);
        CHECK(r.converged);
        CHECK(r.residual <= st.tol);
        CHECK(r.lo == 0.0);
        CHECK(r.hi == 1.0);
    }
    SUBCASE("MA(1) Gaussian pair sums") {
        MAModel m({1.0}, kGauss);
        st.truncation = 8;
        st.nodes = 800;
        CHECK(std::abs(operator_exponent(m, st).lambda - 2 / std::numbers::pi) <= 1e-3);
    }
    SUBCASE("MA(1) uniform with a >= b") {
        MAModel m({1.0}, InnovationDistribution::uniform(-3, 1));
        CHECK(std::abs(operator_exponent(m, st).lambda - 1 / std::numbers::pi) <= 1e-3);
    }
    SUBCASE("MA(1) exponential") {
        MAModel m({-0.5}, kExp);
        CHECK(std::abs(operator_exponent(m, st).lambda - 0.5) <= 1e-3);
    }
}

TEST_CASE("power iteration agrees with a dense eigensolver") {
    OperatorSettings st;
    st.nodes = 12;
    const ProcessModel models[] = {
        ARModel({0.3}, kGauss, InitialDistribution::iid(kGauss)),
        ARModel({-0.4, -0.2}, kGauss, InitialDistribution::iid(kGauss)),
        MAModel({0.7, -0.3}, kUnif),
        MAModel({1.0}, InnovationDistribution::uniform(-1, 3)),
    };
    for (const auto& m : models) {
        const auto op = assemble(m, st);
        REQUIRE(op.size() <= DiscretizedOperator::kDenseLimit);
        const auto r = spectral_radius(op);
        CHECK(r.lambda == doctest::Approx(dense_spectral_radius(op)).epsilon(1e-9));
    }
}

TEST_CASE("power iteration handles a two-cycle") {
    // Eigenvalues +-1; iterates from the ones vector alternate between two directions.
    AxisRule ax = make_axis(0, 1, 2, QuadratureScheme::Midpoint);
    QuadratureGrid grid{1, ax};
    DiscretizedOperator op(grid, {}, {0.0, 2.0, 0.5, 0.0}, {1, 0}, {2, 1});
    const auto r = spectral_radius(op, 1e-12);
    CHECK(r.converged);
    CHECK(r.restarts >= 1);
    CHECK(r.lambda == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.eigenfunction[1] == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("max iterations carries the best iterate") {
    MAModel m({1.0}, kGauss);
    OperatorSettings st;
    st.nodes = 50;
    st.max_iter = 2;
    try {
        operator_exponent(m, st);
        FAIL("expected MaxIterationsExceeded");
    } catch (const MaxIterationsExceeded& e) {
        CHECK_FALSE(e.best().converged);
        CHECK(e.best().iterations == 2);
        CHECK(e.best().lambda > 0.0);
    }
}

TEST_CASE("weights are nonnegative and bound the spectral radius") {
    OperatorSettings st;
    st.nodes = 25;
    const ProcessModel models[] = {ARModel({0.5, 0.2}, kGauss, InitialDistribution::iid(kGauss)),
                                   MAModel({-0.6, 0.9, 0.3}, kGauss), MAModel({2.0}, kExp)};
    for (const auto& m : models) {
        const auto op = assemble(m, st);
        for (std::size_t s = 0; s < op.size(); ++s)
            for (std::size_t k = 0; k < op.grid().nodes_per_axis(); ++k) REQUIRE(op.weight(s, k) >= 0.0);
        CHECK(spectral_radius(op).lambda <= op.norm_bound());
    }
}

TEST_CASE("apply is thread-count independent") {
    MAModel m({0.5, 0.5}, kGauss);
    OperatorSettings st;
    st.nodes = 70;
    const auto op = assemble(m, st);
    std::vector<double> v(op.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.1 * static_cast<double>(i)) + 1.5;
    const auto a = op.apply(v, 1);
    CHECK(op.apply(v, 4) == a);
}

TEST_CASE("tilting does not change the exponent") {
    ARModel m({0.4}, kGauss, InitialDistribution::iid(kGauss));
    OperatorSettings st;
    st.nodes = 60;
    std::vector<double> lams;
    for (double t : {0.0, 0.1, 0.5}) {
        st.tilt = t;
        lams.push_back(operator_exponent(m, st).lambda);
    }
    CHECK(std::abs(lams[1] - lams[0]) <= 1e-8);
    CHECK(std::abs(lams[2] - lams[0]) <= 1e-8);
}

TEST_CASE("defaults") {
    CHECK(default_truncation(kGauss) == doctest::Approx(1.5 * kGauss.tail_bound(1e-10)));
    CHECK(default_truncation(kExp) == doctest::Approx(1.5 * std::log(1e10)));
    CHECK(default_tilt(ARModel({-0.5}, kGauss, InitialDistribution::iid(kGauss))) == 0.0);
    CHECK(default_tilt(ARModel({0.5, 0.1}, kExp, InitialDistribution::iid(kExp))) == doctest::Approx(0.25));
    const auto ax = default_ar_axis(ARModel({-1.0}, kUnif, InitialDistribution::iid(kUnif)), 5.0);
    CHECK(ax == std::pair<double, double>{0.0, 1.0});
    const auto ma = default_ma_axis(MAModel({1.0}, kExp), 10.0);
    CHECK(ma == std::pair<double, double>{0.0, 10.0});
}

TEST_CASE("truncation sweep is ordered and reports Cauchy gaps") {
    MAModel m({1.0}, kGauss);
    OperatorSettings st;
    const auto pts = convergence_sweep(m, {3, 5, 8}, {100, 200}, st);
    REQUIRE(pts.size() == 6);
    CHECK(pts[0].M == 3);
    CHECK(pts[1].N == 200);
    CHECK(pts.back().cauchy == 0.0);
    for (std::size_t i = 2; i < pts.size(); ++i) CHECK(pts[i].lambda >= pts[i - 2].lambda - 1e-7);
}
