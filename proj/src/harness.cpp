#include "persistx/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <sstream>

#include "persistx/error.hpp"
#include "persistx/parallel.hpp"

namespace persistx {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool all_pass(const std::vector<Check>& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

} // namespace

Check check_close(std::string name, double value, double target, double tol) {
    return {std::move(name), value, target, tol, "|v-t|<=tol", std::abs(value - target) <= tol};
}
Check check_le(std::string name, double value, double bound) {
    return {std::move(name), value, bound, 0.0, "v<=t", value <= bound};
}
Check check_ge(std::string name, double value, double bound) {
    return {std::move(name), value, bound, 0.0, "v>=t", value >= bound};
}
Check check_gt(std::string name, double value, double bound) {
    return {std::move(name), value, bound, 0.0, "v>t", value > bound};
}

Check check_true(std::string name, bool ok) {
    return {std::move(name), ok ? 1.0 : 0.0, 1.0, 0.0, "v>=t", ok};
}

Json to_json(const Check& c) {
    return Json{{"name", c.name}, {"value", c.value}, {"target", c.target}, {"tolerance", c.tolerance},
                {"relation", c.relation}, {"pass", c.pass}};
}

// ---------------------------------------------------------------------------
// compare

ExponentFit fit_window(const PersistenceEstimate& est, int n_from, int n_to) {
    std::optional<std::size_t> first, last;
    for (std::size_t i = 0; i < est.table.size(); ++i) {
        if (!first && est.table[i].n >= n_from) first = i;
        if (est.table[i].n <= n_to) last = i;
    }
    if (!first || !last || *last <= *first)
        throw InvalidArgument("window [" + std::to_string(n_from) + ", " + std::to_string(n_to) +
                              "] holds fewer than two horizons");
    return fit_exponent(est, *first, *last);
}

PersistenceEstimate run_monte_carlo(const ProcessModel& model, const MonteCarloSpec& mc, unsigned threads) {
    return mc.method == Estimator::Crude ? estimate_crude(model, mc.horizons, mc.samples, mc.seed, threads)
                                         : estimate_splitting(model, mc.horizons, mc.samples, mc.seed, threads);
}

ComparisonReport compare(const CompareSpec& spec) {
    ComparisonReport r;
    r.name = spec.name;
    r.description = describe(spec.model);
    r.regime = classify_regime(spec.model);

    auto t0 = std::chrono::steady_clock::now();
    if (spec.use_oracle) {
        if (const auto oc = match_oracle(spec.model)) {
            r.oracle_case = case_tag(*oc);
            r.lambda_oracle = oracle_exponent(*oc);
        }
    }
    r.wall_oracle = seconds_since(t0);

    if (spec.op) {
        t0 = std::chrono::steady_clock::now();
        OperatorSettings st = *spec.op;
        st.threads = spec.threads;
        try {
            r.op = operator_exponent(spec.model, st);
        } catch (const MaxIterationsExceeded& e) {
            r.op = e.best();
        }
        r.wall_operator = seconds_since(t0);
        r.checks.push_back(check_le("operator residual", r.op->residual, st.tol));
    }
    if (spec.mc) {
        t0 = std::chrono::steady_clock::now();
        r.mc = run_monte_carlo(spec.model, *spec.mc, spec.threads);
        r.mc_fit = spec.mc->window ? fit_window(*r.mc, spec.mc->window->first, spec.mc->window->second) : r.mc->fit;
        r.wall_mc = seconds_since(t0);
    }

    if (r.lambda_oracle && r.op) {
        r.diff_operator_oracle = std::abs(r.op->lambda - *r.lambda_oracle);
        if (spec.tol.operator_oracle)
            r.checks.push_back(check_close("operator vs oracle", r.op->lambda, *r.lambda_oracle, *spec.tol.operator_oracle));
    }
    if (r.lambda_oracle && r.mc_fit) {
        r.diff_mc_oracle = std::abs(r.mc_fit->lambda - *r.lambda_oracle);
        if (spec.tol.mc_sigma)
            r.checks.push_back(check_close("monte carlo vs oracle", r.mc_fit->lambda, *r.lambda_oracle,
                                           std::max(*spec.tol.mc_sigma * r.mc_fit->half_width, spec.tol.mc_floor)));
    }
    if (r.op && r.mc_fit) {
        r.diff_operator_mc = std::abs(r.op->lambda - r.mc_fit->lambda);
        if (spec.tol.operator_mc)
            r.checks.push_back(check_close("operator vs monte carlo", r.op->lambda, r.mc_fit->lambda,
                                           std::max(*spec.tol.operator_mc,
                                                    spec.tol.mc_sigma.value_or(0.0) * r.mc_fit->half_width)));
    }
    if (spec.mc && !r.mc_fit) r.checks.push_back(check_true("monte carlo fit available", false));
    r.pass = all_pass(r.checks);
    return r;
}

Json to_json(const ComparisonReport& r) {
    Json j;
    j["case"] = r.name;
    j["model"] = r.description;
    j["regime"] = to_json(r.regime);
    j["oracle_case"] = r.oracle_case ? Json(*r.oracle_case) : Json();
    j["lambda_oracle"] = r.lambda_oracle ? Json(*r.lambda_oracle) : Json();
    j["operator"] = r.op ? to_json(*r.op) : Json();
    if (r.mc) {
        Json mc = to_json(*r.mc);
        if (r.mc_fit) {
            mc["lambda_hat"] = r.mc_fit->lambda;
            mc["half_width"] = r.mc_fit->half_width;
            mc["fit_window"] = {r.mc->table[r.mc_fit->first].n, r.mc->table[r.mc_fit->last].n};
        }
        j["monte_carlo"] = std::move(mc);
    } else {
        j["monte_carlo"] = nullptr;
    }
    auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(); };
    j["diffs"] = Json{{"operator_oracle", opt(r.diff_operator_oracle)},
                      {"mc_oracle", opt(r.diff_mc_oracle)},
                      {"operator_mc", opt(r.diff_operator_mc)}};
    Json checks = Json::array();
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    j["checks"] = std::move(checks);
    j["pass"] = r.pass;
    j["wall_time"] = Json{{"oracle", r.wall_oracle}, {"operator", r.wall_operator}, {"monte_carlo", r.wall_mc}};
    return j;
}

// ---------------------------------------------------------------------------
// sweeps

namespace {

SweepEntry operator_point(const ProcessModel& family, const std::vector<double>& coeffs, const OperatorSettings& st) {
    const auto m = with_coeffs(family, coeffs);
    SpectralResult r;
    try {
        r = operator_exponent(m, st);
    } catch (const MaxIterationsExceeded& e) {
        r = e.best();
    }
    return {coeffs, r.lambda, r.residual, r.converged};
}

std::string coeff_label(const std::vector<double>& a) {
    std::ostringstream os;
    os.precision(6);
    os << "(";
    for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
    os << ")";
    return os.str();
}

} // namespace

SweepReport monotonicity_sweep(const ProcessModel& family, const std::vector<std::vector<double>>& grid,
                               const OperatorSettings& settings, double min_increment) {
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (grid[i].size() != grid[i - 1].size()) throw DimensionMismatch("coefficient grid mixes orders");
        for (std::size_t j = 0; j < grid[i].size(); ++j)
            if (grid[i][j] < grid[i - 1][j]) throw InvalidArgument("coefficient grid is not componentwise ordered");
    }
    SweepReport r;
    for (const auto& a : grid) {
        r.entries.push_back(operator_point(family, a, settings));
        r.checks.push_back(check_le("residual at " + coeff_label(a), r.entries.back().residual, settings.tol));
    }
    for (std::size_t i = 1; i < r.entries.size(); ++i) {
        const double inc = r.entries[i].lambda - r.entries[i - 1].lambda;
        r.steps.push_back(inc);
        r.checks.push_back(check_gt("increment " + coeff_label(grid[i - 1]) + " -> " + coeff_label(grid[i]), inc,
                                    min_increment));
    }
    r.pass = all_pass(r.checks);
    return r;
}

SweepReport continuity_sweep(const ProcessModel& family, const std::vector<std::vector<double>>& path,
                             const std::vector<double>& limit, const OperatorSettings& settings, double final_gap) {
    SweepReport r;
    const auto target = operator_point(family, limit, settings);
    r.checks.push_back(check_le("residual at limit", target.residual, settings.tol));
    for (const auto& a : path) {
        r.entries.push_back(operator_point(family, a, settings));
        r.steps.push_back(std::abs(r.entries.back().lambda - target.lambda));
        r.checks.push_back(check_le("residual at " + coeff_label(a), r.entries.back().residual, settings.tol));
    }
    for (std::size_t i = 1; i < r.steps.size(); ++i)
        r.checks.push_back(check_le("gap does not grow at step " + std::to_string(i), r.steps[i],
                                    r.steps[i - 1] + 1e-12));
    if (!r.steps.empty()) r.checks.push_back(check_le("final gap", r.steps.back(), final_gap));
    r.entries.push_back(target);
    r.pass = all_pass(r.checks);
    return r;
}

Json to_json(const SweepReport& r) {
    Json entries = Json::array();
    for (const auto& e : r.entries)
        entries.push_back(Json{{"coeffs", e.coeffs}, {"lambda", e.lambda}, {"residual", e.residual},
                               {"converged", e.converged}});
    Json checks = Json::array();
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    return Json{{"entries", entries}, {"steps", r.steps}, {"checks", checks}, {"pass", r.pass}};
}

Json to_json(const CaseReport& r) {
    Json j;
    j["name"] = r.name;
    j["kind"] = r.kind;
    j["criterion"] = r.criterion;
    j["pass"] = r.pass;
    auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(); };
    j["lambda_oracle"] = opt(r.lambda_oracle);
    j["lambda_operator"] = opt(r.lambda_operator);
    j["lambda_mc"] = opt(r.lambda_mc);
    Json checks = Json::array();
    for (const auto& c : r.checks) checks.push_back(to_json(c));
    j["checks"] = std::move(checks);
    if (!r.error.empty()) j["error"] = r.error;
    j["details"] = r.details;
    j["wall_time"] = r.wall_time;
    return j;
}

// ---------------------------------------------------------------------------
// oracle helpers

double evaluate_oracle_function(const std::string& fn, const Json& args) {
    auto num = [&](const char* k) {
        if (!args.contains(k) || !args.at(k).is_number())
            throw ConfigError("oracle function '" + fn + "' needs numeric argument '" + k + "'");
        return args.at(k).get<double>();
    };
    auto integer = [&](const char* k) {
        if (!args.contains(k) || !args.at(k).is_number_integer())
            throw ConfigError("oracle function '" + fn + "' needs integer argument '" + k + "'");
        return args.at(k).get<int>();
    };
    auto conv = [&]() {
        return parse_convention(args.contains("convention") ? args.at("convention").get<std::string>() : "ge");
    };
    if (fn == "ar1_uniform_exponent") return ar1_uniform_exponent(num("a"), num("b"));
    if (fn == "ar1_exponential_exponent") return ar1_exponential_exponent(num("a1"));
    if (fn == "ar1_exponential_pn") {
        const auto init = args.contains("initial")
                              ? initial_from_json(args.at("initial"), InnovationDistribution::exponential(), {})
                              : InitialDistribution::iid(InnovationDistribution::exponential());
        return ar1_exponential_pn(num("a1"), integer("n"), init);
    }
    if (fn == "ma1_uniform_exponent") return ma1_uniform_exponent(num("a"), num("b"));
    if (fn == "ma1_uniform_root") return ma1_uniform_root(num("a"), num("b"));
    if (fn == "ma1_uniform_root_residual") {
        const double a = num("a"), b = num("b");
        return std::abs(ma1_uniform_residual(ma1_uniform_root(a, b), a, b));
    }
    if (fn == "ma1_uniform_formula") return 4.0 * num("b") / (std::numbers::pi * (num("a") + num("b")));
    if (fn == "ma1_symmetric_series") return ma1_symmetric_series(integer("c"), integer("terms"));
    if (fn == "ma1_symmetric_ratio") {
        const int c = integer("c"), t = integer("terms");
        return ma1_symmetric_series(c + 1, t) / ma1_symmetric_series(c, t);
    }
    if (fn == "rademacher_pn") return rademacher_pn(integer("n"), conv());
    if (fn == "rademacher_pn_transfer") return rademacher_pn_transfer(integer("n"), conv());
    if (fn == "rademacher_transfer_max_rel_diff") {
        double worst = 0.0;
        for (auto c : {SurvivalConvention::NonNegative, SurvivalConvention::StrictlyPositive})
            for (int n = 0; n <= integer("n_max"); ++n) {
                const double a = rademacher_pn(n, c), b = rademacher_pn_transfer(n, c);
                worst = std::max(worst, std::abs(a - b) / std::abs(b));
            }
        return worst;
    }
    if (fn == "rademacher_exponent") return rademacher_exponent(conv());
    if (fn == "ma1_exponential_exponent") return ma1_exponential_exponent(num("a1"));
    if (fn == "degenerate_factorial_pn") return degenerate_factorial_pn(integer("n"));
    if (fn == "characteristic_root") {
        if (!args.contains("coeffs")) throw ConfigError("characteristic_root needs 'coeffs'");
        return characteristic_root(args.at("coeffs").get<std::vector<double>>());
    }
    if (fn == "logconcave_min_gap") {
        if (!args.contains("law")) throw ConfigError("logconcave_min_gap needs 'law'");
        return logconcave_min_gap(innovation_from_json(args.at("law")),
                                  args.value("shifts", std::vector<double>{0.1, 0.5, 1.0}),
                                  args.value("thresholds", std::vector<double>{0.0, 0.25, 0.5, 1.0, 1.5, 2.0}));
    }
    throw ConfigError("unknown oracle function '" + fn + "'");
}

double ma_prob_z0_nonneg(const MAModel& model, std::uint64_t seed) {
    const auto& f = model.innovation();
    const auto a = model.coeffs();
    if (std::holds_alternative<law::Gaussian>(f.law())) return 0.5;
    const bool strict = model.convention() == SurvivalConvention::StrictlyPositive;
    if (a.size() == 1 && f.has_density()) {
        // E[1 - F(-a1 xi)], integrated over the whole support: shifting by tb makes
        // the conditioning event of conditional_mean cover it.
        const double tb = f.tail_bound(1e-16);
        std::vector<double> kinks;
        if (a[0] != 0.0)
            for (double edge : {f.support_lo(), f.support_hi()})
                if (std::isfinite(edge)) kinks.push_back(-edge / a[0] + tb);
        const auto g = [&](double u) { return 1.0 - f.cdf(-a[0] * (u - tb)); };
        return conditional_mean(f, g, tb, kinks) * (1.0 - f.cdf(-tb));
    }
    if (a.size() == 1 && std::holds_alternative<law::Rademacher>(f.law())) {
        double p = 0.0;
        for (double x0 : {-1.0, 1.0})
            for (double xm : {-1.0, 1.0}) {
                const double z = x0 + a[0] * xm;
                p += 0.25 * (strict ? z > 0.0 : z >= 0.0);
            }
        return p;
    }
    const ProcessModel pm = model;
    const auto est = estimate_crude(pm, {0}, 1000000, seed, 1);
    return est.table[0].p_hat + 4.0 * est.table[0].se;
}

// ---------------------------------------------------------------------------
// suite

namespace {

struct Context {
    unsigned threads = 1;
    std::uint64_t seed = 1;
    Json operator_defaults = Json::object();
    Json tolerance_defaults = Json::object();
};

using Runner = std::function<void(CaseReport&)>;

Json merged(const Json& defaults, const Json& c, const char* key) {
    Json out = defaults;
    if (c.contains(key)) {
        if (!c.at(key).is_object()) throw ConfigError(std::string("'") + key + "' must be an object");
        for (auto it = c.at(key).begin(); it != c.at(key).end(); ++it) out[it.key()] = it.value();
    }
    return out;
}

template <class T>
T field(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw ConfigError(std::string("field '") + key + "' has the wrong type");
    }
}

template <class T>
T required(const Json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
    return field<T>(j, key, T{});
}

OperatorSettings parse_operator(const Json& j, unsigned threads) {
    OperatorSettings st;
    if (j.contains("M")) st.truncation = field<double>(j, "M", 0.0);
    st.nodes = field<std::size_t>(j, "N", st.nodes);
    st.scheme = parse_scheme(field<std::string>(j, "scheme", "gauss-legendre"));
    if (j.contains("tilt")) st.tilt = field<double>(j, "tilt", 0.0);
    st.correction = parse_correction(field<std::string>(j, "correction", "moment"));
    st.tol = field<double>(j, "tol", st.tol);
    st.max_iter = field<std::size_t>(j, "max_iter", st.max_iter);
    st.threads = threads;
    return st;
}

MonteCarloSpec parse_mc(const Json& j, std::uint64_t default_seed) {
    if (!j.is_object()) throw ConfigError("'mc' must be an object");
    MonteCarloSpec mc;
    mc.method = parse_estimator(field<std::string>(j, "method", "crude"));
    mc.samples = static_cast<std::uint64_t>(field<double>(j, "samples", 100000.0));
    mc.seed = field<std::uint64_t>(j, "seed", default_seed);
    if (j.contains("horizons")) {
        mc.horizons = field<std::vector<int>>(j, "horizons", {});
    } else {
        mc.horizons = horizon_range(required<int>(j, "n_max"), field<int>(j, "n_min", 1));
    }
    if (j.contains("window")) {
        const auto w = field<std::vector<int>>(j, "window", {});
        if (w.size() != 2) throw ConfigError("'window' must be [n_from, n_to]");
        mc.window = std::make_pair(w[0], w[1]);
    }
    return mc;
}

std::vector<ProcessModel> parse_models(const Json& c) {
    std::vector<ProcessModel> out;
    if (c.contains("model")) out.push_back(model_from_json(c.at("model")));
    if (c.contains("models")) {
        if (!c.at("models").is_array()) throw ConfigError("'models' must be an array");
        for (const auto& m : c.at("models")) out.push_back(model_from_json(m));
    }
    if (out.empty()) throw ConfigError("case needs 'model' or 'models'");
    return out;
}

std::vector<std::vector<double>> parse_coeff_list(const Json& c, const char* key) {
    const auto v = required<std::vector<std::vector<double>>>(c, key);
    if (v.empty()) throw ConfigError(std::string("'") + key + "' must not be empty");
    return v;
}

// -- case kinds --------------------------------------------------------------

Runner prepare_compare(const Json& c, const Context& ctx) {
    CompareSpec spec{field<std::string>(c, "name", "compare"), model_from_json(required<Json>(c, "model")), true,
                     std::nullopt, std::nullopt, {}, ctx.threads};
    spec.use_oracle = field<bool>(c, "oracle", true);
    spec.threads = ctx.threads;
    if (c.contains("operator")) spec.op = parse_operator(merged(ctx.operator_defaults, c, "operator"), ctx.threads);
    if (c.contains("mc")) spec.mc = parse_mc(c.at("mc"), ctx.seed);
    const Json tol = merged(ctx.tolerance_defaults, c, "tolerances");
    if (tol.contains("operator_oracle")) spec.tol.operator_oracle = field<double>(tol, "operator_oracle", 0.0);
    if (tol.contains("mc_sigma")) spec.tol.mc_sigma = field<double>(tol, "mc_sigma", 0.0);
    spec.tol.mc_floor = field<double>(tol, "mc_floor", 0.0);
    if (tol.contains("operator_mc")) spec.tol.operator_mc = field<double>(tol, "operator_mc", 0.0);
    const auto expect_regime = field<std::string>(c, "expect_regime", "");
    return [spec, expect_regime](CaseReport& out) {
        const auto r = compare(spec);
        out.checks = r.checks;
        if (!expect_regime.empty())
            out.checks.push_back(check_true("regime is " + expect_regime, to_string(r.regime.regime) == expect_regime));
        out.lambda_oracle = r.lambda_oracle;
        if (r.op) out.lambda_operator = r.op->lambda;
        if (r.mc_fit) out.lambda_mc = r.mc_fit->lambda;
        out.details = to_json(r);
    };
}

Runner prepare_mc_pn(const Json& c, const Context& ctx) {
    const auto model = model_from_json(required<Json>(c, "model"));
    const auto mc = parse_mc(required<Json>(c, "mc"), ctx.seed);
    const auto sigma = c.contains("pn_sigma") ? std::optional<double>(field<double>(c, "pn_sigma", 4.0)) : std::nullopt;
    const auto range = field<std::vector<double>>(c, "lambda_range", {});
    if (!range.empty() && range.size() != 2) throw ConfigError("'lambda_range' must be [lo, hi]");
    const Json log_rate = field<Json>(c, "log_rate", Json());
    const auto explicit_pn = field<std::vector<std::vector<double>>>(c, "expected_pn", {});
    const unsigned threads = ctx.threads;
    return [=](CaseReport& out) {
        const auto est = run_monte_carlo(model, mc, threads);
        const auto oc = match_oracle(model);
        std::map<int, double> exact;
        if (oc) {
            const auto table = oracle_pn_table(*oc, mc.horizons.back());
            for (std::size_t n = 0; n < table.size(); ++n) exact[static_cast<int>(n)] = table[n];
            out.lambda_oracle = oracle_exponent(*oc);
        }
        for (const auto& e : explicit_pn) exact[static_cast<int>(e.at(0))] = e.at(1);
        if (sigma) {
            if (exact.empty()) throw InvalidArgument("no exact p_n available for this model");
            for (const auto& h : est.table)
                if (const auto it = exact.find(h.n); it != exact.end())
                    out.checks.push_back(check_close("p_hat(" + std::to_string(h.n) + ") within " +
                                                         format_double(*sigma) + " SE",
                                                     h.p_hat, it->second, *sigma * h.se));
        }
        std::optional<ExponentFit> fit = mc.window ? fit_window(est, mc.window->first, mc.window->second) : est.fit;
        if (fit) out.lambda_mc = fit->lambda;
        if (!range.empty()) {
            const double v = fit ? fit->lambda : std::numeric_limits<double>::quiet_NaN();
            out.checks.push_back(check_ge("lambda_hat lower", v, range[0]));
            out.checks.push_back(check_le("lambda_hat upper", v, range[1]));
        }
        if (!log_rate.is_null()) {
            const int n = log_rate.at("n").get<int>();
            const double target = log_rate.contains("lambda") ? log_rate.at("lambda").get<double>()
                                                              : out.lambda_oracle.value_or(std::nan(""));
            const auto it = std::find_if(est.table.begin(), est.table.end(), [&](const HorizonEstimate& h) { return h.n == n; });
            if (it == est.table.end()) throw InvalidArgument("log_rate horizon not in the grid");
            out.checks.push_back(check_close("log p_hat(" + std::to_string(n) + ")/n", it->log_p_hat / n,
                                             std::log(target), log_rate.at("tol").get<double>()));
        }
        out.details = Json{{"model", describe(model)}, {"estimate", to_json(est)}};
    };
}

Runner prepare_oracle(const Json& c, const Context&) {
    const auto fn = required<std::string>(c, "function");
    const Json args = field<Json>(c, "args", Json::object());
    const double expect = required<double>(c, "expect");
    const double tol = field<double>(c, "tol", 0.0);
    evaluate_oracle_function(fn, args);  // validates the name and arguments
    return [=](CaseReport& out) {
        const double v = evaluate_oracle_function(fn, args);
        out.checks.push_back(check_close(fn, v, expect, tol));
        out.details = Json{{"function", fn}, {"args", args}, {"value", v}};
    };
}

Runner prepare_eigen_residual(const Json& c, const Context& ctx) {
    const auto model = model_from_json(required<Json>(c, "model"));
    const auto* ma = std::get_if<MAModel>(&model);
    if (!ma || ma->order() != 1 || !std::holds_alternative<law::Exponential>(ma->innovation().law()))
        throw ConfigError("eigen-residual supports the MA(1) exponential eigenfunction only");
    const double a1 = ma->coeffs()[0];
    ma1_exponential_exponent(a1);
    const auto st = parse_operator(merged(ctx.operator_defaults, c, "operator"), ctx.threads);
    const double tol = required<double>(c, "tol");
    return [=](CaseReport& out) {
        const auto op = assemble(model, st);
        const double lam = ma1_exponential_exponent(a1);
        std::vector<double> g(op.size());
        for (std::size_t i = 0; i < g.size(); ++i) g[i] = ma1_exponential_eigenfunction(a1, op.grid().axis.nodes[i]);
        const auto kg = op.apply(g, st.threads);
        double r = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) r = std::max(r, std::abs(kg[i] - lam * g[i]));
        out.checks.push_back(check_le("||Kg - lambda g||_inf", r, tol));
        out.lambda_oracle = lam;
        out.details = Json{{"model", describe(model)}, {"residual", r}, {"M", op.grid().axis.hi}, {"N", op.grid().nodes_per_axis()}};
    };
}

Runner prepare_operator_trend(const Json& c, const Context& ctx) {
    const auto model = model_from_json(required<Json>(c, "model"));
    const auto base = parse_operator(merged(ctx.operator_defaults, c, "operator"), ctx.threads);
    const auto grids = parse_coeff_list(c, "grids");
    for (const auto& g : grids)
        if (g.size() != 2) throw ConfigError("'grids' entries must be [M, N]");
    const auto expect = field<std::string>(c, "expect", "decreasing");
    if (expect != "decreasing" && expect != "increasing") throw ConfigError("'expect' must be increasing | decreasing");
    return [=](CaseReport& out) {
        Json pts = Json::array();
        std::vector<double> lams;
        for (const auto& g : grids) {
            OperatorSettings st = base;
            st.truncation = g[0];
            st.nodes = static_cast<std::size_t>(g[1]);
            SpectralResult r;
            try {
                r = operator_exponent(model, st);
            } catch (const MaxIterationsExceeded& e) {
                r = e.best();
            }
            out.checks.push_back(check_le("residual at (" + format_double(g[0]) + ", " + format_double(g[1]) + ")",
                                          r.residual, st.tol));
            lams.push_back(r.lambda);
            pts.push_back(to_json(r));
        }
        for (std::size_t i = 1; i < lams.size(); ++i) {
            const double d = lams[i] - lams[i - 1];
            out.checks.push_back(expect == "decreasing" ? check_gt("strict decrease " + std::to_string(i), -d, 0.0)
                                                        : check_gt("strict increase " + std::to_string(i), d, 0.0));
        }
        out.lambda_operator = lams.back();
        out.details = Json{{"model", describe(model)}, {"regime", to_json(classify_regime(model))}, {"points", pts}};
    };
}

Runner prepare_monotonicity(const Json& c, const Context& ctx) {
    const auto model = model_from_json(required<Json>(c, "model"));
    const auto st = parse_operator(merged(ctx.operator_defaults, c, "operator"), ctx.threads);
    const auto grid = parse_coeff_list(c, "coeff_grid");
    const double min_inc = field<double>(c, "min_increment", 1e-5);
    const Json first = field<Json>(c, "first", Json());
    return [=](CaseReport& out) {
        const auto r = monotonicity_sweep(model, grid, st, min_inc);
        out.checks = r.checks;
        if (!first.is_null())
            out.checks.push_back(check_close("lambda at first grid point", r.entries.front().lambda,
                                             first.at("expect").get<double>(), first.at("tol").get<double>()));
        out.lambda_operator = r.entries.back().lambda;
        out.details = to_json(r);
    };
}

Runner prepare_continuity(const Json& c, const Context& ctx) {
    const auto model = model_from_json(required<Json>(c, "model"));
    const auto st = parse_operator(merged(ctx.operator_defaults, c, "operator"), ctx.threads);
    const auto path = parse_coeff_list(c, "path");
    const auto limit = required<std::vector<double>>(c, "limit");
    const double gap = field<double>(c, "final_gap", 1e-3);
    const auto oracle_value = c.contains("expect_limit") ? std::optional<double>(field<double>(c, "expect_limit", 0.0))
                                                         : std::nullopt;
    const double oracle_tol = field<double>(c, "expect_limit_tol", 1e-3);
    return [=](CaseReport& out) {
        const auto r = continuity_sweep(model, path, limit, st, gap);
        out.checks = r.checks;
        out.lambda_operator = r.entries.back().lambda;
        if (oracle_value) {
            out.lambda_oracle = *oracle_value;
            out.checks.push_back(check_close("limit vs closed form", r.entries.back().lambda, *oracle_value, oracle_tol));
        }
        out.details = to_json(r);
    };
}

Runner prepare_window_trend(const Json& c, const Context& ctx) {
    const auto model = model_from_json(required<Json>(c, "model"));
    const auto mc = parse_mc(required<Json>(c, "mc"), ctx.seed);
    const auto windows = parse_coeff_list(c, "windows");
    const auto expect = field<std::string>(c, "expect", "increasing");
    if (expect != "decreasing" && expect != "increasing") throw ConfigError("'expect' must be increasing | decreasing");
    const auto last_above = c.contains("last_above") ? std::optional<double>(field<double>(c, "last_above", 0.0)) : std::nullopt;
    const auto last_below = c.contains("last_below") ? std::optional<double>(field<double>(c, "last_below", 0.0)) : std::nullopt;
    const unsigned threads = ctx.threads;
    return [=](CaseReport& out) {
        const auto est = run_monte_carlo(model, mc, threads);
        std::vector<double> lams;
        Json fits = Json::array();
        for (const auto& w : windows) {
            const auto f = fit_window(est, static_cast<int>(w.at(0)), static_cast<int>(w.at(1)));
            lams.push_back(f.lambda);
            fits.push_back(Json{{"window", w}, {"fit", to_json(f)}});
        }
        for (std::size_t i = 1; i < lams.size(); ++i)
            out.checks.push_back(expect == "increasing"
                                     ? check_gt("lambda_hat increases at window " + std::to_string(i), lams[i] - lams[i - 1], 0.0)
                                     : check_gt("lambda_hat decreases at window " + std::to_string(i), lams[i - 1] - lams[i], 0.0));
        if (last_above) out.checks.push_back(check_gt("last window lambda_hat", lams.back(), *last_above));
        if (last_below) out.checks.push_back(check_le("last window lambda_hat", lams.back(), *last_below));
        out.lambda_mc = lams.back();
        out.details = Json{{"model", describe(model)}, {"regime", to_json(classify_regime(model))}, {"fits", fits},
                           {"estimate", to_json(est)}};
    };
}

Runner prepare_regime(const Json& c, const Context&) {
    const auto model = model_from_json(required<Json>(c, "model"));
    const auto expect = required<std::string>(c, "expect");
    const auto rho = c.contains("rho") ? std::optional<double>(field<double>(c, "rho", 0.0)) : std::nullopt;
    const double rho_tol = field<double>(c, "rho_tol", 0.0);
    return [=](CaseReport& out) {
        const auto r = classify_regime(model);
        out.checks.push_back(check_true("regime " + to_string(r.regime) + " == " + expect, to_string(r.regime) == expect));
        if (rho) out.checks.push_back(check_close("characteristic root", r.rho.value_or(std::nan("")), *rho, rho_tol));
        out.details = Json{{"model", describe(model)}, {"regime", to_json(r)}};
    };
}

// -- properties --------------------------------------------------------------

Runner prepare_property(const Json& c, const Context& ctx) {
    const auto prop = required<std::string>(c, "property");
    const unsigned threads = ctx.threads;
    const std::uint64_t seed = ctx.seed;

    if (prop == "logconcave") {
        std::vector<InnovationDistribution> laws;
        for (const auto& l : required<Json>(c, "laws")) laws.push_back(innovation_from_json(l));
        const auto shifts = field<std::vector<double>>(c, "shifts", {0.1, 0.5, 1.0});
        const auto thresholds = field<std::vector<double>>(c, "thresholds", {0.0, 0.25, 0.5, 1.0, 1.5, 2.0});
        const double tol = field<double>(c, "tol", 1e-9);
        return [=](CaseReport& out) {
            for (const auto& l : laws)
                out.checks.push_back(check_ge("conditional-mean gap " + l.to_string(),
                                              logconcave_min_gap(l, shifts, thresholds), -tol));
        };
    }

    const auto models = parse_models(c);
    const auto st = parse_operator(merged(ctx.operator_defaults, c, "operator"), threads);

    if (prop == "nonnegativity") {
        const double tol = field<double>(c, "tol", 1e-14);
        return [=](CaseReport& out) {
            for (const auto& m : models) {
                const auto op = assemble(m, st);
                double min_w = 0.0;
                for (std::size_t s = 0; s < op.size(); ++s)
                    for (std::size_t k = 0; k < op.grid().nodes_per_axis(); ++k) min_w = std::min(min_w, op.weight(s, k));
                double min_out = std::numeric_limits<double>::infinity();
                for (std::uint64_t probe = 0; probe < 4; ++probe) {
                    RandomStream rs(seed, "probe", probe);
                    std::vector<double> v(op.size());
                    for (auto& x : v) x = probe == 0 ? 1.0 : rs.uniform();
                    const auto kv = op.apply(v, threads);
                    min_out = std::min(min_out, *std::min_element(kv.begin(), kv.end()));
                }
                out.checks.push_back(check_ge("min weight " + describe(m), min_w, 0.0));
                out.checks.push_back(check_ge("min of K v " + describe(m), min_out, -tol));
            }
        };
    }
    if (prop == "conjugation") {
        const auto tilts = field<std::vector<double>>(c, "tilts", {0.0, 0.1, 0.5});
        const double tol = field<double>(c, "tol", 1e-8);
        for (const auto& m : models)
            if (!std::holds_alternative<ARModel>(m)) throw ConfigError("conjugation property applies to AR models");
        return [=](CaseReport& out) {
            for (const auto& m : models) {
                std::vector<double> lams;
                for (double t : tilts) {
                    OperatorSettings s = st;
                    s.tilt = t;
                    const auto r = operator_exponent(m, s);
                    lams.push_back(r.lambda);
                }
                for (std::size_t i = 1; i < lams.size(); ++i)
                    out.checks.push_back(check_close("tilt " + format_double(tilts[i]) + " vs " + format_double(tilts[0]) +
                                                         " " + describe(m),
                                                     lams[i], lams[0], tol));
            }
        };
    }
    if (prop == "truncation-monotonicity") {
        const auto Ms = required<std::vector<double>>(c, "Ms");
        const auto Ns = field<std::vector<std::size_t>>(c, "Ns", {st.nodes});
        const double noise = field<double>(c, "noise", 1e-7);
        return [=](CaseReport& out) {
            Json sweeps = Json::array();
            for (const auto& m : models) {
                const auto pts = convergence_sweep(m, Ms, Ns, st);
                Json arr = Json::array();
                for (const auto& p : pts) arr.push_back(to_json(p));
                sweeps.push_back(Json{{"model", describe(m)}, {"points", arr}});
                for (std::size_t ni = 0; ni < Ns.size(); ++ni)
                    for (std::size_t mi = 1; mi < Ms.size(); ++mi) {
                        const auto& a = pts[(mi - 1) * Ns.size() + ni];
                        const auto& b = pts[mi * Ns.size() + ni];
                        out.checks.push_back(check_ge("lambda(M=" + format_double(b.M) + ") >= lambda(M=" +
                                                          format_double(a.M) + ") N=" + std::to_string(b.N) + " " +
                                                          describe(m),
                                                      b.lambda, a.lambda - noise));
                    }
            }
            out.details = Json{{"sweeps", sweeps}};
        };
    }
    if (prop == "eigenvalue-bound") {
        return [=](CaseReport& out) {
            for (const auto& m : models) {
                const auto op = assemble(m, st);
                const auto r = spectral_radius(op, st.tol, st.max_iter, threads);
                out.checks.push_back(check_le("lambda <= ||K1|| " + describe(m), r.lambda, op.norm_bound() * (1 + 1e-12)));
            }
        };
    }

    const auto mc = parse_mc(required<Json>(c, "mc"), seed);
    if (prop == "q-dependence") {
        for (const auto& m : models)
            if (!std::holds_alternative<MAModel>(m)) throw ConfigError("q-dependence property applies to MA models");
        return [=](CaseReport& out) {
            for (const auto& m : models) {
                const auto& ma = std::get<MAModel>(m);
                const double p0 = ma_prob_z0_nonneg(ma, seed);
                const auto est = run_monte_carlo(m, mc, threads);
                const double q = static_cast<double>(ma.order());
                for (const auto& h : est.table) {
                    const double bound = std::pow(p0, std::floor(h.n / (q + 1.0))) + 4.0 * h.se;
                    out.checks.push_back(check_le("p_hat(" + std::to_string(h.n) + ") " + describe(m), h.p_hat, bound));
                }
            }
        };
    }
    if (prop == "seed-determinism") {
        const auto thread_list = field<std::vector<unsigned>>(c, "threads", {1, 2, 8});
        const auto methods = field<std::vector<std::string>>(c, "methods", {"crude", "splitting"});
        return [=](CaseReport& out) {
            for (const auto& m : models)
                for (const auto& method : methods) {
                    MonteCarloSpec spec = mc;
                    spec.method = parse_estimator(method);
                    std::string reference;
                    for (unsigned t : thread_list) {
                        const auto text = dump(to_json(run_monte_carlo(m, spec, t)));
                        if (reference.empty()) reference = text;
                        out.checks.push_back(
                            check_true(method + " threads=" + std::to_string(t) + " identical " + describe(m), text == reference));
                    }
                }
        };
    }
    if (prop == "convention-equality") {
        return [=](CaseReport& out) {
            for (const auto& m : models) {
                if (!model_innovation(m).has_density()) throw InvalidArgument("convention equality needs a density");
                const auto ge = run_monte_carlo(with_convention(m, SurvivalConvention::NonNegative), mc, threads);
                const auto gt = run_monte_carlo(with_convention(m, SurvivalConvention::StrictlyPositive), mc, threads);
                bool same = ge.table.size() == gt.table.size();
                for (std::size_t i = 0; same && i < ge.table.size(); ++i) same = ge.table[i].count == gt.table[i].count;
                out.checks.push_back(check_true("ge and gt counts identical " + describe(m), same));
            }
        };
    }
    if (prop == "nestedness") {
        return [=](CaseReport& out) {
            for (const auto& m : models) {
                MonteCarloSpec spec = mc;
                spec.method = Estimator::Crude;
                const auto est = run_monte_carlo(m, spec, threads);
                for (std::size_t i = 1; i < est.table.size(); ++i)
                    out.checks.push_back(check_le("count(" + std::to_string(est.table[i].n) + ") " + describe(m),
                                                  static_cast<double>(est.table[i].count),
                                                  static_cast<double>(est.table[i - 1].count)));
            }
        };
    }
    throw ConfigError("unknown property '" + prop + "'");
}

using Preparer = Runner (*)(const Json&, const Context&);

const std::map<std::string, Preparer>& preparers() {
    static const std::map<std::string, Preparer> m{
        {"compare", prepare_compare},
        {"mc-pn", prepare_mc_pn},
        {"oracle", prepare_oracle},
        {"eigen-residual", prepare_eigen_residual},
        {"operator-trend", prepare_operator_trend},
        {"monotonicity", prepare_monotonicity},
        {"continuity", prepare_continuity},
        {"window-trend", prepare_window_trend},
        {"regime", prepare_regime},
        {"property", prepare_property},
    };
    return m;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return out + "\"";
}

std::string safe_file_name(const std::string& s) {
    std::string out;
    for (char ch : s) out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' ? ch : '_';
    return out;
}

} // namespace

const std::vector<std::string>& case_kinds() {
    static const std::vector<std::string> kinds = [] {
        std::vector<std::string> k;
        for (const auto& [name, _] : preparers()) k.push_back(name);
        return k;
    }();
    return kinds;
}

SuiteResult run_suite_text(const std::string& text, const SuiteOptions& options) {
    const Json config = parse_json_text(text);
    Context ctx;
    const Json* cases = &config;
    if (config.is_object()) {
        if (!config.contains("cases")) throw ConfigError("suite config needs a 'cases' list", 1);
        cases = &config.at("cases");
        ctx.seed = field<std::uint64_t>(config, "seed", ctx.seed);
        ctx.operator_defaults = field<Json>(config, "operator", Json::object());
        ctx.tolerance_defaults = field<Json>(config, "tolerances", Json::object());
        if (config.contains("threads")) ctx.threads = field<unsigned>(config, "threads", 1);
    }
    if (!cases->is_array()) throw ConfigError("'cases' must be a list", locate_token(text, "cases"));
    if (options.threads) ctx.threads = options.threads;
    ctx.threads = resolve_threads(ctx.threads);

    // Validate everything before running anything.
    struct Prepared {
        std::string name, kind, criterion;
        Runner run;
    };
    std::vector<Prepared> plan;
    std::size_t index = 0;
    for (const auto& c : *cases) {
        ++index;
        const std::string fallback = "case-" + std::to_string(index);
        if (!c.is_object()) throw ConfigError("case " + std::to_string(index) + " is not an object");
        const auto name = c.contains("name") && c.at("name").is_string() ? c.at("name").get<std::string>() : fallback;
        const std::size_t line = name == fallback ? 0 : locate_token(text, name);
        if (!c.contains("kind") || !c.at("kind").is_string())
            throw ConfigError("case '" + name + "' needs a 'kind' tag", line);
        const auto kind = c.at("kind").get<std::string>();
        const auto it = preparers().find(kind);
        if (it == preparers().end()) {
            std::string known;
            for (const auto& k : case_kinds()) known += (known.empty() ? "" : " | ") + k;
            throw ConfigError("unknown case kind '" + kind + "' in case '" + name + "' (expected " + known + ")",
                              locate_token(text, kind));
        }
        Context local = ctx;
        if (c.contains("seed")) local.seed = field<std::uint64_t>(c, "seed", ctx.seed);
        try {
            plan.push_back({name, kind, c.contains("criterion") ? c.at("criterion").dump() : "", it->second(c, local)});
        } catch (const ConfigError& e) {
            if (e.line()) throw;
            throw ConfigError("case '" + name + "': " + e.what(), line);
        } catch (const Error& e) {
            throw ConfigError("case '" + name + "': " + e.what(), line);
        } catch (const Json::exception& e) {
            throw ConfigError("case '" + name + "': " + e.what(), line);
        }
    }
    for (auto& p : plan)
        if (p.criterion.size() >= 2 && p.criterion.front() == '"') p.criterion = p.criterion.substr(1, p.criterion.size() - 2);

    if (!options.out_dir.empty()) std::filesystem::create_directories(options.out_dir);

    SuiteResult result;
    std::ostringstream csv;
    csv << "index,name,kind,criterion,lambda_oracle,lambda_operator,lambda_mc,checks_passed,checks_total,pass\n";
    index = 0;
    for (auto& p : plan) {
        ++index;
        CaseReport rep;
        rep.name = p.name;
        rep.kind = p.kind;
        rep.criterion = p.criterion;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            p.run(rep);
            rep.pass = !rep.checks.empty() && all_pass(rep.checks);
        } catch (const std::exception& e) {
            rep.error = e.what();
            rep.pass = false;
        }
        rep.wall_time = seconds_since(t0);
        result.pass = result.pass && rep.pass;
        if (!options.out_dir.empty()) {
            char prefix[16];
            std::snprintf(prefix, sizeof prefix, "%03zu-", index);
            write_text_file((std::filesystem::path(options.out_dir) / (prefix + safe_file_name(p.name) + ".json")).string(),
                            dump(to_json(rep)));
        }
        const auto passed = std::count_if(rep.checks.begin(), rep.checks.end(), [](const Check& c) { return c.pass; });
        auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
        csv << index << ',' << csv_field(rep.name) << ',' << rep.kind << ',' << csv_field(rep.criterion) << ','
            << opt(rep.lambda_oracle) << ',' << opt(rep.lambda_operator) << ',' << opt(rep.lambda_mc) << ',' << passed
            << ',' << rep.checks.size() << ',' << (rep.pass ? "PASS" : "FAIL") << '\n';
        if (options.on_case) options.on_case(rep);
        result.cases.push_back(std::move(rep));
    }
    if (!options.out_dir.empty())
        write_text_file((std::filesystem::path(options.out_dir) / "summary.csv").string(), csv.str());
    return result;
}

SuiteResult run_suite(const std::string& config_path, const SuiteOptions& options) {
    return run_suite_text(read_text_file(config_path), options);
}

} // namespace persistx
