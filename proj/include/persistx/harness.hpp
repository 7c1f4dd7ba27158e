#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "persistx/json_io.hpp"
#include "persistx/operator.hpp"
#include "persistx/oracle.hpp"
#include "persistx/simulate.hpp"

namespace persistx {

/// One pass/fail assertion.  `relation` is one of
///   "|v-t|<=tol", "v<=t", "v>=t", "v>t", "v<t"
/// and `pass` is recomputable from (value, target, tolerance).
struct Check {
    std::string name;
    double value = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    std::string relation = "|v-t|<=tol";
    bool pass = false;
};

Check check_close(std::string name, double value, double target, double tol);
Check check_le(std::string name, double value, double bound);
Check check_ge(std::string name, double value, double bound);
Check check_gt(std::string name, double value, double bound);
/// Boolean assertion recorded as value 1/0 against target 1.
Check check_true(std::string name, bool ok);
Json to_json(const Check& c);

struct MonteCarloSpec {
    Estimator method = Estimator::Crude;
    std::uint64_t samples = 100000;
    std::vector<int> horizons;
    std::uint64_t seed = 1;
    std::optional<std::pair<int, int>> window;  // horizon values, inclusive
};

struct CompareTolerances {
    std::optional<double> operator_oracle;  // |lambda_op - lambda_oracle|
    std::optional<double> mc_sigma;         // |lambda_mc - lambda_oracle| <= max(sigma * hw, floor)
    double mc_floor = 0.0;
    std::optional<double> operator_mc;  // |lambda_op - lambda_mc| <= max(this, mc_sigma * hw)
};

struct CompareSpec {
    std::string name;
    ProcessModel model;
    bool use_oracle = true;
    std::optional<OperatorSettings> op;
    std::optional<MonteCarloSpec> mc;
    CompareTolerances tol;
    unsigned threads = 1;
};

struct ComparisonReport {
    std::string name;
    std::string description;
    RegimeReport regime;
    std::optional<std::string> oracle_case;
    std::optional<double> lambda_oracle;
    std::optional<SpectralResult> op;
    std::optional<PersistenceEstimate> mc;
    std::optional<ExponentFit> mc_fit;
    std::optional<double> diff_operator_oracle, diff_mc_oracle, diff_operator_mc;
    std::vector<Check> checks;
    bool pass = true;
    double wall_oracle = 0.0, wall_operator = 0.0, wall_mc = 0.0;
};

ComparisonReport compare(const CompareSpec& spec);
Json to_json(const ComparisonReport& r);

/// Fits a Monte Carlo estimate over a window given in horizon values.
ExponentFit fit_window(const PersistenceEstimate& est, int n_from, int n_to);

PersistenceEstimate run_monte_carlo(const ProcessModel& model, const MonteCarloSpec& mc, unsigned threads);

struct SweepEntry {
    std::vector<double> coeffs;
    double lambda = 0.0;
    double residual = 0.0;
    bool converged = false;
};

struct SweepReport {
    std::vector<SweepEntry> entries;
    std::vector<double> steps;  // increments (monotonicity) or gaps to the limit (continuity)
    std::vector<Check> checks;
    bool pass = true;
};

/// Operator-route lambda along an ordered coefficient grid; each increment
/// must exceed `min_increment`.
SweepReport monotonicity_sweep(const ProcessModel& family, const std::vector<std::vector<double>>& grid,
                               const OperatorSettings& settings, double min_increment = 1e-5);

/// |lambda(a_k) - lambda(a)| must not grow along the path and must end below `final_gap`.
SweepReport continuity_sweep(const ProcessModel& family, const std::vector<std::vector<double>>& path,
                             const std::vector<double>& limit, const OperatorSettings& settings,
                             double final_gap = 1e-3);

Json to_json(const SweepReport& r);

/// Result of one suite case.
struct CaseReport {
    std::string name;
    std::string kind;
    std::string criterion;
    std::vector<Check> checks;
    Json details = Json::object();
    std::optional<double> lambda_oracle, lambda_operator, lambda_mc;
    std::string error;  // set when the case threw
    bool pass = false;
    double wall_time = 0.0;
};

Json to_json(const CaseReport& r);

struct SuiteOptions {
    std::string out_dir;  // empty: no files written
    unsigned threads = 0;  // 0: config value, else resolve_threads()
    std::function<void(const CaseReport&)> on_case;
};

struct SuiteResult {
    std::vector<CaseReport> cases;
    bool pass = true;
};

/// Validates every case of the config, then runs them in order.  Writes one
/// JSON report per case and summary.csv into out_dir.  Config problems throw
/// ConfigError with a line number.
SuiteResult run_suite(const std::string& config_path, const SuiteOptions& options);
SuiteResult run_suite_text(const std::string& config_text, const SuiteOptions& options);

/// Case tags accepted in suite configs.
const std::vector<std::string>& case_kinds();

/// Named oracle quantities used by suite "oracle" cases and the CLI.
double evaluate_oracle_function(const std::string& function, const Json& args);

/// P(Z_0 >= 0) for an MA model: exact for Gaussian innovations and q = 1,
/// otherwise a Monte Carlo estimate plus four standard errors (an upper bound).
double ma_prob_z0_nonneg(const MAModel& model, std::uint64_t seed);

} // namespace persistx
