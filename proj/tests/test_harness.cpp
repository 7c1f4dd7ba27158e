#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

#include "persistx/error.hpp"
#include "persistx/harness.hpp"

using namespace persistx;

namespace {

const auto kUnif = InnovationDistribution::uniform(-1, 1);
const auto kGauss = InnovationDistribution::gaussian(1);

std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("persistx-test-" + name);
    std::filesystem::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("model JSON round trip") {
    const char* text = R"({"process": "ar", "order": 2, "coeffs": [0.5, -0.25],
                           "innovation": {"kind": "uniform", "lo": -1, "hi": 2},
                           "initial": {"kind": "point", "x0": [0.1, 0.2]}, "convention": "gt"})";
    const auto m = model_from_json(parse_json_text(text));
    const auto back = model_from_json(to_json(m));
    CHECK(describe(back) == describe(m));
    CHECK(model_convention(back) == SurvivalConvention::StrictlyPositive);
    CHECK(model_from_json(parse_json_text(R"({"process": "ma", "coeffs": [1], "innovation": "gaussian:2"})")) .index() == 1);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(model_from_json(parse_json_text(R"({"process": "ar", "coeffs": [1, 2], "order": 1, "innovation": "exponential"})")),
                    ConfigError);
    CHECK_THROWS_AS(model_from_json(parse_json_text(R"({"process": "arma", "coeffs": [1], "innovation": "exponential"})")),
                    ConfigError);
    CHECK_THROWS_AS(model_from_json(parse_json_text(R"({"process": "ma", "coeffs": [1], "innovation": {"kind": "cauchy"}})")),
                    ConfigError);
    try {
        parse_json_text("{\n  \"a\": 1,\n  \"b\": ]\n}");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("numbers serialize to round-trip precision") {
    const double x = 0.1 + 0.2;
    CHECK(std::stod(format_double(x)) == x);
    CHECK(parse_json_text(dump(Json{{"x", x}}))["x"].get<double>() == x);
}

TEST_CASE("check helpers") {
    CHECK(check_close("a", 1.0, 1.0005, 1e-3).pass);
    CHECK_FALSE(check_close("a", 1.0, 1.002, 1e-3).pass);
    CHECK_FALSE(check_close("nan", std::nan(""), 0.0, 1.0).pass);
    CHECK(check_le("b", 1.0, 1.0).pass);
    CHECK_FALSE(check_gt("c", 1.0, 1.0).pass);
    CHECK(check_true("d", true).pass);
}

TEST_CASE("compare routes on the AR(1) uniform model") {
    CompareSpec spec{"ar1", ARModel({-1.0}, kUnif, InitialDistribution::iid(kUnif)), true, OperatorSettings{},
                     MonteCarloSpec{Estimator::Crude, 200000, horizon_range(12), 5, std::nullopt}, {}, 1};
    spec.tol.operator_oracle = 1e-3;
    spec.tol.mc_sigma = 3.0;
    spec.tol.mc_floor = 0.01;
    const auto r = compare(spec);
    CHECK(r.pass);
    REQUIRE(r.lambda_oracle);
    CHECK(r.oracle_case == std::optional<std::string>("ar1-uniform"));
    REQUIRE(r.diff_operator_oracle);
    CHECK(*r.diff_operator_oracle <= 1e-3);
    const auto j = to_json(r);
    CHECK(j["monte_carlo"]["lambda_hat"].is_number());
}

TEST_CASE("fit windows are given in horizons") {
    ARModel m({-1.0}, kUnif, InitialDistribution::iid(kUnif));
    const auto est = estimate_crude(m, horizon_range(10), 100000, 2);
    const auto f = fit_window(est, 3, 7);
    CHECK(est.table[f.first].n == 3);
    CHECK(est.table[f.last].n == 7);
    CHECK_THROWS_AS(fit_window(est, 9, 9), InvalidArgument);
}

TEST_CASE("monotonicity sweep") {
    ARModel fam({0.0}, kGauss, InitialDistribution::iid(kGauss));
    OperatorSettings st;
    st.nodes = 100;
    const auto r = monotonicity_sweep(fam, {{0.0}, {0.2}, {0.4}}, st, 1e-4);
    CHECK(r.pass);
    CHECK(r.steps.size() == 2);
    CHECK(monotonicity_sweep(fam, {{0.3}}, st).pass);
    CHECK_THROWS_AS(monotonicity_sweep(fam, {{0.3}, {0.1}}, st), InvalidArgument);
}

TEST_CASE("continuity sweeps") {
    OperatorSettings st;
    SUBCASE("constant path") {
        ARModel fam({0.3}, kGauss, InitialDistribution::iid(kGauss));
        st.nodes = 60;
        const auto r = continuity_sweep(fam, {{0.3}, {0.3}}, {0.3}, st);
        CHECK(r.pass);
        for (double g : r.steps) CHECK(g == 0.0);
    }
    SUBCASE("MA(1) uniform towards a1 = 1") {
        MAModel fam({1.0}, kUnif);
        std::vector<std::vector<double>> path;
        for (int k = 1; k <= 8; ++k) path.push_back({1.0 + std::ldexp(1.0, -k)});
        const auto r = continuity_sweep(fam, path, {1.0}, st, 5e-3);
        CHECK(r.pass);
        CHECK(std::abs(r.entries.back().lambda - 2 / std::numbers::pi) <= 1e-3);
    }
    SUBCASE("AR(1) uniform towards a1 = -1") {
        ARModel fam({-1.0}, kUnif, InitialDistribution::iid(kUnif));
        std::vector<std::vector<double>> path;
        for (int k = 1; k <= 8; ++k) path.push_back({-1.0 - std::ldexp(1.0, -k)});
        const auto r = continuity_sweep(fam, path, {-1.0}, st, 5e-3);
        CHECK(r.pass);
        CHECK(std::abs(r.entries.back().lambda - 1 / std::numbers::pi) <= 1e-3);
    }
}

TEST_CASE("q-dependence reference probability") {
    CHECK(ma_prob_z0_nonneg(MAModel({0.7}, kGauss), 1) == 0.5);
    CHECK(ma_prob_z0_nonneg(MAModel({1.0}, kUnif), 1) == doctest::Approx(0.5).epsilon(1e-9));
    // Uniform(-1, 3) with a1 = 1: P(xi_0 + xi_{-1} >= 0) = 1 - 2/16.
    CHECK(ma_prob_z0_nonneg(MAModel({1.0}, InnovationDistribution::uniform(-1, 3)), 1) ==
          doctest::Approx(0.875).epsilon(1e-9));
    CHECK(ma_prob_z0_nonneg(MAModel({1.0}, InnovationDistribution::rademacher(), SurvivalConvention::StrictlyPositive), 1) ==
          0.25);
    CHECK(ma_prob_z0_nonneg(MAModel({-0.5}, InnovationDistribution::exponential()), 1) ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("oracle functions by name") {
    CHECK(evaluate_oracle_function("ma1_exponential_exponent", Json{{"a1", -0.5}}) == 0.5);
    CHECK(evaluate_oracle_function("characteristic_root", Json{{"coeffs", {1.2}}}) == 1.2);
    CHECK_THROWS_AS(evaluate_oracle_function("nope", Json::object()), ConfigError);
    CHECK_THROWS_AS(evaluate_oracle_function("ar1_uniform_exponent", Json{{"a", 1}}), ConfigError);
}

TEST_CASE("empty suite") {
    const auto dir = scratch_dir("empty");
    const auto r = run_suite_text(R"({"cases": []})", {dir.string(), 1, {}});
    CHECK(r.pass);
    CHECK(r.cases.empty());
    const auto csv = read_text_file((dir / "summary.csv").string());
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
    CHECK(run_suite_text("[]", {}).cases.empty());
}

TEST_CASE("unknown case tag is a config error naming the tag") {
    const std::string text = "{\"cases\": [\n  {\"name\": \"x\", \"kind\": \"oracle\", \"function\": \"degenerate_factorial_pn\", "
                             "\"args\": {\"n\": 0}, \"expect\": 0.5},\n  {\"name\": \"y\", \"kind\": \"bogus-kind\"}\n]}";
    try {
        run_suite_text(text, {});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bogus-kind") != std::string::npos);
        CHECK(e.line() == 3);
    }
}

TEST_CASE("invalid case fields are reported before anything runs") {
    const std::string text = "[\n {\"name\": \"bad-model\", \"kind\": \"compare\",\n  \"model\": {\"process\": \"ar\"}}\n]";
    try {
        run_suite_text(text, {});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("coeffs") != std::string::npos);
    }
}

TEST_CASE("suite reports are reproducible apart from wall time") {
    const std::string text = R"({"seed": 3, "cases": [
      {"name": "crude", "kind": "mc-pn", "model": {"process": "ma", "coeffs": [-1], "innovation": "gaussian"},
       "mc": {"samples": 100000, "n_min": 0, "n_max": 3}, "pn_sigma": 4},
      {"name": "regime", "kind": "regime", "model": {"process": "ar", "coeffs": [1.2], "innovation": "uniform:-1,1"},
       "expect": "ar-supercritical", "rho": 1.2}]})";
    const auto a = scratch_dir("repro-a"), b = scratch_dir("repro-b");
    const auto ra = run_suite_text(text, {a.string(), 1, {}});
    const auto rb = run_suite_text(text, {b.string(), 2, {}});
    CHECK(ra.pass);
    CHECK(rb.pass);
    CHECK(read_text_file((a / "summary.csv").string()) == read_text_file((b / "summary.csv").string()));
    auto strip = [](Json j) {
        j.erase("wall_time");
        return j.dump();
    };
    for (const auto& f : {"001-crude.json", "002-regime.json"})
        CHECK(strip(read_json_file((a / f).string())) == strip(read_json_file((b / f).string())));
}
