// persistx: command-line frontend for the persistence-exponent library.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include "persistx/error.hpp"
#include "persistx/harness.hpp"
#include "persistx/parallel.hpp"

using namespace persistx;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitComputation = 1;
constexpr int kExitUsage = 2;

struct ModelFlags {
    std::string process = "ar";
    std::vector<double> coeffs;
    std::string innovation = "gaussian:1";
    std::string init = "iid";
    std::string convention = "ge";
    std::string model_file;

    void add(CLI::App* app) {
        app->add_option("--process", process, "ar | ma")->check(CLI::IsMember({"ar", "ma"}))->capture_default_str();
        app->add_option("--coeffs", coeffs, "coefficients a_1..a_p, comma separated (e.g. --coeffs=-1)")
            ->delimiter(',')
            ->expected(1, 64);
        app->add_option("--innovation", innovation,
                        "innovation law: uniform:lo,hi | gaussian:sd | exponential | rademacher")
            ->capture_default_str();
        app->add_option("--init", init, "AR initial law: iid | point:x0,..,x_{p-1} | stationary")->capture_default_str();
        app->add_option("--convention", convention, "survival event: ge (Z >= 0) | gt (Z > 0)")
            ->check(CLI::IsMember({"ge", "gt"}))
            ->capture_default_str();
        app->add_option("--model", model_file, "JSON model file; replaces the flags above");
    }

    ProcessModel build() const {
        if (!model_file.empty()) return model_from_json(read_json_file(model_file));
        if (coeffs.empty()) throw CLI::RequiredError("--coeffs");
        Json j{{"process", process}, {"coeffs", coeffs}, {"innovation", innovation}, {"convention", convention}};
        if (process == "ar") {
            if (init.rfind("point:", 0) == 0) {
                std::vector<double> x0;
                std::stringstream ss(init.substr(6));
                for (std::string tok; std::getline(ss, tok, ',');) x0.push_back(std::stod(tok));
                j["initial"] = Json{{"kind", "point"}, {"x0", x0}};
            } else {
                j["initial"] = Json{{"kind", init}};
            }
        }
        return model_from_json(j);
    }
};

struct OperatorFlags {
    double truncation = 0.0;
    std::size_t nodes = 400;
    std::string scheme = "gauss-legendre";
    double tilt = -1.0;
    std::string correction = "moment";
    double tol = 1e-10;
    std::size_t max_iter = 200000;

    void add(CLI::App* app) {
        app->add_option("--M", truncation, "truncation level; 0 = 1.5 x the 1e-10 innovation tail bound")
            ->capture_default_str();
        app->add_option("--N", nodes, "quadrature nodes per axis")->capture_default_str();
        app->add_option("--scheme", scheme, "gauss-legendre | midpoint")->capture_default_str();
        app->add_option("--tilt", tilt,
                        "AR exponential tilt delta; negative = default (half the tail decay rate over p, "
                        "0 when all a_j <= 0)")
            ->capture_default_str();
        app->add_option("--correction", correction, "cut-cell correction for MA kernels: moment | fraction | none")
            ->capture_default_str();
        app->add_option("--tol", tol, "power-iteration tolerance on |d lambda| and the residual")->capture_default_str();
        app->add_option("--max-iter", max_iter, "power-iteration cap")->capture_default_str();
    }

    OperatorSettings build(unsigned threads) const {
        OperatorSettings st;
        if (truncation > 0.0) st.truncation = truncation;
        st.nodes = nodes;
        st.scheme = parse_scheme(scheme);
        if (tilt >= 0.0) st.tilt = tilt;
        st.correction = parse_correction(correction);
        st.tol = tol;
        st.max_iter = max_iter;
        st.threads = threads;
        return st;
    }
};

struct MonteCarloFlags {
    std::string method = "crude";
    std::uint64_t samples = 1000000;
    int n_max = 40;
    int n_min = 1;
    std::uint64_t seed = 1;
    std::vector<int> window;

    void add(CLI::App* app) {
        app->add_option("--method", method, "crude | splitting")
            ->check(CLI::IsMember({"crude", "splitting"}))
            ->capture_default_str();
        app->add_option("--reps,--particles", samples, "replicates (crude) or particles (splitting)")
            ->capture_default_str();
        app->add_option("--n", n_max, "largest horizon")->capture_default_str();
        app->add_option("--n-min", n_min, "smallest horizon")->capture_default_str();
        app->add_option("--seed", seed, "master seed; fixes every random draw")->capture_default_str();
        app->add_option("--window", window,
                        "fit window FROM,TO in horizons; default: last half of the usable horizon prefix")
            ->delimiter(',')
            ->expected(2);
    }

    MonteCarloSpec build() const {
        MonteCarloSpec mc;
        mc.method = parse_estimator(method);
        mc.samples = samples;
        mc.horizons = horizon_range(n_max, n_min);
        mc.seed = seed;
        if (!window.empty()) mc.window = std::make_pair(window[0], window[1]);
        return mc;
    }
};

void emit(const std::string& out_path, const Json& j) {
    if (out_path.empty() || out_path == "-")
        std::cout << dump(j);
    else
        write_text_file(out_path, dump(j));
}

std::string table_csv(const PersistenceEstimate& e) {
    std::string s = "n,p_hat,log_p_hat,se,count\n";
    for (const auto& h : e.table)
        s += std::to_string(h.n) + "," + format_double(h.p_hat) + "," + format_double(h.log_p_hat) + "," +
             format_double(h.se) + "," + std::to_string(h.count) + "\n";
    return s;
}

double since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<std::vector<double>> parse_coeff_grid(const std::vector<std::string>& items) {
    // Each item is one coefficient vector: "0.1" or "0.1,0.2".
    std::vector<std::vector<double>> out;
    for (const auto& it : items) {
        std::vector<double> v;
        std::stringstream ss(it);
        for (std::string tok; std::getline(ss, tok, ',');) v.push_back(std::stod(tok));
        out.push_back(std::move(v));
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Persistence exponents of AR(p) and MA(q) processes: Monte Carlo, operator, closed forms."};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "show help for every subcommand");

    unsigned threads = 0;
    std::string out;
    std::string csv;
    auto common = [&](CLI::App* sub) {
        sub->add_option("--threads", threads, "worker cap; 0 = $PERSISTX_THREADS, else machine parallelism")
            ->capture_default_str();
        sub->add_option("--out", out, "output file (directory for compare --config); default stdout");
    };

    // simulate
    ModelFlags sim_model;
    MonteCarloFlags sim_mc;
    auto* sim = app.add_subcommand("simulate", "Monte Carlo estimate of p_n and the fitted exponent");
    sim_model.add(sim);
    sim_mc.add(sim);
    common(sim);
    sim->add_option("--csv", csv, "also write the per-horizon table as CSV");

    // operator
    ModelFlags op_model;
    OperatorFlags op_flags;
    std::string eig_csv;
    auto* opc = app.add_subcommand("operator", "Perron root of the discretized persistence operator");
    op_model.add(opc);
    op_flags.add(opc);
    common(opc);
    opc->add_option("--eigenfunction", eig_csv, "write (node, psi(node)) as CSV; one-dimensional grids only");

    // oracle
    std::string oracle_case;
    double a = 1.0, b = 1.0, a1 = -1.0;
    int c = 2, terms = 200, n_table = 10;
    std::string oconv = "ge", oinit = "iid";
    auto* orc = app.add_subcommand("oracle", "Closed-form exponent and exact p_n");
    orc->add_option("--case", oracle_case,
                    "ar1-uniform | ar1-exponential | ma1-uniform | ma1-symmetric | ma1-rademacher | "
                    "ma1-exponential | degenerate-ma")
        ->required()
        ->check(CLI::IsMember({"ar1-uniform", "ar1-exponential", "ma1-uniform", "ma1-symmetric", "ma1-rademacher",
                               "ma1-exponential", "degenerate-ma"}));
    orc->add_option("--a", a, "uniform innovation is Uniform(-a, b)")->capture_default_str();
    orc->add_option("--b", b, "uniform innovation is Uniform(-a, b)")->capture_default_str();
    orc->add_option("--a1", a1, "coefficient a_1")->capture_default_str();
    orc->add_option("--c", c, "ma1-symmetric: number of consecutive pair constraints")->capture_default_str();
    orc->add_option("--terms", terms, "ma1-symmetric: series truncation")->capture_default_str();
    orc->add_option("--convention", oconv, "ma1-rademacher: ge | gt")
        ->check(CLI::IsMember({"ge", "gt"}))
        ->capture_default_str();
    orc->add_option("--init", oinit, "ar1-exponential initial law: iid | point:x0")->capture_default_str();
    orc->add_option("--table", n_table, "largest n of the exact p_n table")->capture_default_str();
    common(orc);

    // compare
    std::string config;
    ModelFlags cmp_model;
    OperatorFlags cmp_op;
    MonteCarloFlags cmp_mc;
    bool cmp_no_mc = false, cmp_no_op = false;
    auto* cmp = app.add_subcommand("compare", "Cross-validate routes on one model, or run a suite with --config");
    cmp->add_option("--config", config, "suite config (JSON); writes per-case reports and summary.csv to --out");
    cmp_model.add(cmp);
    cmp_op.add(cmp);
    cmp_mc.add(cmp);
    cmp->add_flag("--no-mc", cmp_no_mc, "skip the Monte Carlo route");
    cmp->add_flag("--no-operator", cmp_no_op, "skip the operator route");
    common(cmp);

    // sweep
    std::string sweep_kind = "monotonicity";
    std::vector<std::string> grid_items, limit_items;
    std::vector<double> Ms;
    std::vector<std::size_t> Ns;
    double min_inc = 1e-5, final_gap = 1e-3;
    ModelFlags sw_model;
    OperatorFlags sw_op;
    auto* sw = app.add_subcommand("sweep", "Operator-route sweeps over coefficients or grids");
    sw->add_option("--kind", sweep_kind, "monotonicity | continuity | convergence")
        ->check(CLI::IsMember({"monotonicity", "continuity", "convergence"}))
        ->capture_default_str();
    sw->add_option("--grid", grid_items, "coefficient vectors, one per value; separate vectors by ';' (0.1,0.2;0.2,0.3)")
        ->delimiter(';');
    sw->add_option("--limit", limit_items, "continuity: limiting coefficient vector")->expected(1);
    sw->add_option("--Ms", Ms, "convergence: truncation levels")->delimiter(',');
    sw->add_option("--Ns", Ns, "convergence: nodes per axis")->delimiter(',');
    sw->add_option("--min-increment", min_inc, "monotonicity: required increment")->capture_default_str();
    sw->add_option("--final-gap", final_gap, "continuity: required final gap")->capture_default_str();
    sw_model.add(sw);
    sw_op.add(sw);
    common(sw);
    sw->add_option("--csv", csv, "also write the sweep table as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const unsigned nthreads = resolve_threads(threads);

        if (sim->parsed()) {
            const auto model = sim_model.build();
            const auto spec = sim_mc.build();
            const auto t0 = std::chrono::steady_clock::now();
            const auto est = run_monte_carlo(model, spec, nthreads);
            std::optional<ExponentFit> fit = spec.window ? fit_window(est, spec.window->first, spec.window->second)
                                                         : est.fit;
            Json j;
            j["config"] = Json{{"model", to_json(model)}, {"method", sim_mc.method}, {"samples", spec.samples},
                               {"n_min", sim_mc.n_min}, {"n_max", sim_mc.n_max}, {"seed", spec.seed}};
            j["estimate"] = to_json(est);
            j["lambda_hat"] = fit ? Json(fit->lambda) : Json();
            j["half_width"] = fit ? Json(fit->half_width) : Json();
            if (fit) j["fit_window"] = {est.table[fit->first].n, est.table[fit->last].n};
            j["regime"] = to_json(classify_regime(model));
            j["wall_time"] = since(t0);
            emit(out, j);
            if (!csv.empty()) write_text_file(csv, table_csv(est));
            return kExitOk;
        }

        if (opc->parsed()) {
            const auto model = op_model.build();
            const auto st = op_flags.build(nthreads);
            const auto t0 = std::chrono::steady_clock::now();
            SpectralResult r;
            int code = kExitOk;
            try {
                r = operator_exponent(model, st);
            } catch (const MaxIterationsExceeded& e) {
                std::cerr << "persistx: " << e.what() << "\n";
                r = e.best();
                code = kExitComputation;
            }
            Json j = to_json(r);
            j["model"] = to_json(model);
            j["regime"] = to_json(classify_regime(model));
            j["wall_time"] = since(t0);
            if (!eig_csv.empty()) {
                if (r.dim != 1) throw InvalidArgument("--eigenfunction needs a one-dimensional grid");
                const auto axis = make_axis(r.lo, r.hi, r.nodes, r.scheme);
                std::string s = "node,psi\n";
                for (std::size_t i = 0; i < axis.size(); ++i)
                    s += format_double(axis.nodes[i]) + "," + format_double(r.eigenfunction[i]) + "\n";
                write_text_file(eig_csv, s);
                j["eigenfunction"] = eig_csv;
            } else {
                j["eigenfunction"] = nullptr;
            }
            emit(out, j);
            return code;
        }

        if (orc->parsed()) {
            OracleCase oc = oracle_case::AR1Uniform{a, b};
            Json params;
            if (oracle_case == "ar1-uniform") {
                params = {{"a", a}, {"b", b}};
            } else if (oracle_case == "ar1-exponential") {
                oc = oracle_case::AR1Exponential{a1};
                params = {{"a1", a1}, {"init", oinit}};
            } else if (oracle_case == "ma1-uniform") {
                oc = oracle_case::MA1Uniform{a, b};
                params = {{"a", a}, {"b", b}};
            } else if (oracle_case == "ma1-symmetric") {
                oc = oracle_case::MA1Symmetric{c, terms};
                params = {{"c", c}, {"terms", terms}};
            } else if (oracle_case == "ma1-rademacher") {
                oc = oracle_case::MA1Rademacher{parse_convention(oconv)};
                params = {{"convention", oconv}};
            } else if (oracle_case == "ma1-exponential") {
                oc = oracle_case::MA1Exponential{a1};
                params = {{"a1", a1}};
            } else {
                oc = oracle_case::DegenerateMA{{-1.0}};
                params = {{"a1", -1.0}};
            }
            Json j{{"case", oracle_case}, {"parameters", params}, {"exponent", oracle_exponent(oc)}};
            if (oracle_case == "ma1-symmetric") {
                j["series"] = ma1_symmetric_series(c, terms);
            } else if (oracle_case == "ar1-exponential") {
                InitialDistribution init = InitialDistribution::iid(InnovationDistribution::exponential());
                if (oinit.rfind("point:", 0) == 0)
                    init = InitialDistribution::point_mass({std::stod(oinit.substr(6))});
                else if (oinit != "iid")
                    throw CLI::ValidationError("--init", "expected iid | point:x0");
                Json pn = Json::array();
                for (int n = 0; n <= n_table; ++n) pn.push_back(ar1_exponential_pn(a1, n, init));
                j["pn"] = pn;
            } else {
                const auto pn = oracle_pn_table(oc, n_table);
                j["pn"] = pn.empty() ? Json() : Json(pn);
            }
            emit(out, j);
            return kExitOk;
        }

        if (cmp->parsed()) {
            if (!config.empty()) {
                SuiteOptions opts;
                opts.out_dir = out.empty() ? "reports" : out;
                opts.threads = nthreads;
                opts.on_case = [](const CaseReport& r) {
                    std::cerr << (r.pass ? "PASS " : "FAIL ") << r.name;
                    if (!r.error.empty()) std::cerr << " (" << r.error << ")";
                    std::cerr << "  [" << r.wall_time << " s]\n";
                };
                const auto result = run_suite(config, opts);
                std::cerr << result.cases.size() << " cases, " << (result.pass ? "all passed" : "some failed")
                          << "; reports in " << opts.out_dir << "\n";
                return result.pass ? kExitOk : kExitComputation;
            }
            CompareSpec spec{"cli", cmp_model.build(), true, std::nullopt, std::nullopt, {}, nthreads};
            if (!cmp_no_op) spec.op = cmp_op.build(nthreads);
            if (!cmp_no_mc) spec.mc = cmp_mc.build();
            emit(out, to_json(compare(spec)));
            return kExitOk;
        }

        if (sw->parsed()) {
            const auto model = sw_model.build();
            const auto st = sw_op.build(nthreads);
            Json j;
            std::string table;
            if (sweep_kind == "convergence") {
                if (Ms.empty()) Ms.push_back(default_truncation(model_innovation(model)));
                if (Ns.empty()) Ns.push_back(st.nodes);
                const auto pts = convergence_sweep(model, Ms, Ns, st);
                Json arr = Json::array();
                table = "M,N,lambda,residual,iterations,converged,cauchy\n";
                for (const auto& p : pts) {
                    arr.push_back(to_json(p));
                    table += format_double(p.M) + "," + std::to_string(p.N) + "," + format_double(p.lambda) + "," +
                             format_double(p.residual) + "," + std::to_string(p.iterations) + "," +
                             (p.converged ? "1" : "0") + "," + format_double(p.cauchy) + "\n";
                }
                j = Json{{"kind", sweep_kind}, {"model", to_json(model)}, {"points", arr}};
            } else {
                const auto grid = parse_coeff_grid(grid_items);
                if (grid.empty()) throw CLI::RequiredError("--grid");
                SweepReport r;
                if (sweep_kind == "monotonicity") {
                    r = monotonicity_sweep(model, grid, st, min_inc);
                } else {
                    const auto lim = parse_coeff_grid(limit_items);
                    if (lim.empty()) throw CLI::RequiredError("--limit");
                    r = continuity_sweep(model, grid, lim.front(), st, final_gap);
                }
                table = "coeffs,lambda,residual,converged\n";
                for (const auto& e : r.entries) {
                    std::string cs;
                    for (double x : e.coeffs) cs += (cs.empty() ? "" : ";") + format_double(x);
                    table += cs + "," + format_double(e.lambda) + "," + format_double(e.residual) + "," +
                             (e.converged ? "1" : "0") + "\n";
                }
                j = to_json(r);
                j["kind"] = sweep_kind;
                j["model"] = to_json(model);
            }
            emit(out, j);
            if (!csv.empty()) write_text_file(csv, table);
            return kExitOk;
        }
    } catch (const CLI::Error& e) {
        std::cerr << "persistx: " << e.what() << "\n" << "run with --help for the flag grammar\n";
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "persistx: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "persistx: " << e.what() << "\n";
        return kExitComputation;
    }
    return kExitUsage;
}
