#include "persistx/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "persistx/error.hpp"

namespace persistx {

namespace {

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

double get_number(const Json& j, const char* key, const char* what) {
    if (!j.contains(key)) throw ConfigError(std::string(what) + " needs field '" + key + "'");
    if (!j.at(key).is_number()) throw ConfigError(std::string(what) + ": field '" + key + "' must be a number");
    return j.at(key).get<double>();
}

std::vector<double> get_vector(const Json& j, const char* key, const char* what) {
    if (!j.contains(key)) throw ConfigError(std::string(what) + " needs field '" + key + "'");
    const auto& v = j.at(key);
    if (!v.is_array()) throw ConfigError(std::string(what) + ": field '" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(std::string(what) + ": field '" + key + "' must hold numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

} // namespace

Json parse_json_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what(), line_of_offset(text, e.byte ? e.byte - 1 : 0));
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Json read_json_file(const std::string& path) { return parse_json_text(read_text_file(path)); }

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
    if (!out) throw Error("write failed for '" + path + "'");
}

std::size_t locate_token(const std::string& text, const std::string& token) {
    const auto pos = text.find("\"" + token + "\"");
    return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

InnovationDistribution innovation_from_json(const Json& j) {
    try {
        if (j.is_string()) return InnovationDistribution::parse(j.get<std::string>());
        if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
            throw ConfigError("innovation must be a string or an object with a 'kind'");
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "uniform") return InnovationDistribution::uniform(get_number(j, "lo", "uniform"), get_number(j, "hi", "uniform"));
        if (kind == "gaussian" || kind == "normal")
            return InnovationDistribution::gaussian(j.contains("sd") ? get_number(j, "sd", "gaussian") : 1.0);
        if (kind == "exponential") return InnovationDistribution::exponential();
        if (kind == "rademacher") return InnovationDistribution::rademacher();
        throw ConfigError("unknown innovation kind '" + kind + "'");
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

Json to_json(const InnovationDistribution& f) {
    Json j;
    if (const auto* u = std::get_if<law::Uniform>(&f.law())) {
        j["kind"] = "uniform";
        j["lo"] = u->lo;
        j["hi"] = u->hi;
    } else if (const auto* g = std::get_if<law::Gaussian>(&f.law())) {
        j["kind"] = "gaussian";
        j["sd"] = g->sd;
    } else if (std::holds_alternative<law::Exponential>(f.law())) {
        j["kind"] = "exponential";
    } else {
        j["kind"] = "rademacher";
    }
    return j;
}

InitialDistribution initial_from_json(const Json& j, const InnovationDistribution& innovation,
                                      std::span<const double> coeffs) {
    try {
        const std::string kind = j.is_string() ? j.get<std::string>()
                                 : j.is_object() && j.contains("kind") ? j.at("kind").get<std::string>()
                                                                       : "";
        if (kind == "point") return InitialDistribution::point_mass(get_vector(j, "x0", "point initial law"));
        if (kind == "iid") {
            if (j.is_object() && j.contains("law")) return InitialDistribution::iid(innovation_from_json(j.at("law")));
            return InitialDistribution::iid(innovation);
        }
        if (kind == "stationary") {
            if (coeffs.size() != 1) throw DimensionMismatch("stationary initial law requires order 1");
            return InitialDistribution::stationary_ar1_gaussian(coeffs[0]);
        }
        throw ConfigError("unknown initial law kind '" + kind + "' (expected point | iid | stationary)");
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
}

Json to_json(const InitialDistribution& init) {
    Json j;
    if (const auto* pm = std::get_if<initial::PointMass>(&init.law())) {
        j["kind"] = "point";
        j["x0"] = pm->x0;
    } else if (const auto* iid = std::get_if<initial::IIDInnovation>(&init.law())) {
        j["kind"] = "iid";
        j["law"] = to_json(iid->law);
    } else {
        j["kind"] = "stationary";
        j["a1"] = std::get<initial::StationaryAR1Gaussian>(init.law()).a1;
    }
    return j;
}

ProcessModel model_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("model must be a JSON object");
    if (!j.contains("process") || !j.at("process").is_string()) throw ConfigError("model needs 'process': \"ar\" | \"ma\"");
    const auto process = j.at("process").get<std::string>();
    if (process != "ar" && process != "ma") throw ConfigError("unknown process '" + process + "' (expected ar | ma)");
    const auto coeffs = get_vector(j, "coeffs", "model");
    if (j.contains("order")) {
        if (!j.at("order").is_number_integer()) throw ConfigError("model 'order' must be an integer");
        if (j.at("order").get<long long>() != static_cast<long long>(coeffs.size()))
            throw ConfigError("model 'order' is " + std::to_string(j.at("order").get<long long>()) + " but " +
                              std::to_string(coeffs.size()) + " coefficients were given");
    }
    if (!j.contains("innovation")) throw ConfigError("model needs 'innovation'");
    const auto innovation = innovation_from_json(j.at("innovation"));
    SurvivalConvention conv = SurvivalConvention::NonNegative;
    try {
        if (j.contains("convention")) conv = parse_convention(j.at("convention").get<std::string>());
        if (process == "ar") {
            const auto init = j.contains("initial") ? initial_from_json(j.at("initial"), innovation, coeffs)
                                                    : InitialDistribution::iid(innovation);
            return ARModel(coeffs, innovation, init, conv);
        }
        if (j.contains("initial")) throw ConfigError("MA models take no 'initial' law");
        return MAModel(coeffs, innovation, conv);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
}

Json to_json(const ProcessModel& m) {
    Json j;
    const bool ar = std::holds_alternative<ARModel>(m);
    j["process"] = ar ? "ar" : "ma";
    j["order"] = model_order(m);
    const auto a = model_coeffs(m);
    j["coeffs"] = std::vector<double>(a.begin(), a.end());
    j["innovation"] = to_json(model_innovation(m));
    if (ar) j["initial"] = to_json(std::get<ARModel>(m).initial());
    j["convention"] = to_string(model_convention(m));
    return j;
}

Json to_json(const ExponentFit& f) {
    return Json{{"lambda", f.lambda}, {"half_width", f.half_width}, {"slope", f.slope},
                {"first", f.first}, {"last", f.last}};
}

Json to_json(const PersistenceEstimate& e) {
    Json j;
    j["method"] = to_string(e.method);
    j["seed"] = e.seed;
    j["samples"] = e.samples;
    Json table = Json::array();
    for (const auto& h : e.table)
        table.push_back(Json{{"n", h.n}, {"p_hat", h.p_hat}, {"log_p_hat", std::isfinite(h.log_p_hat) ? Json(h.log_p_hat) : Json()},
                             {"se", h.se}, {"count", h.count}});
    j["table"] = std::move(table);
    Json slopes = Json::array();
    for (const auto& s : e.window_slopes) slopes.push_back(Json{{"n_from", s.n_from}, {"n_to", s.n_to}, {"slope", s.slope}});
    j["window_slopes"] = std::move(slopes);
    if (!e.step_fractions.empty()) j["step_fractions"] = e.step_fractions;
    if (e.fit) {
        j["lambda_hat"] = e.fit->lambda;
        j["half_width"] = e.fit->half_width;
        j["fit_window"] = {e.table[e.fit->first].n, e.table[e.fit->last].n};
    } else {
        j["lambda_hat"] = nullptr;
        j["half_width"] = nullptr;
    }
    return j;
}

Json to_json(const SpectralResult& r, bool with_eigenfunction) {
    Json j;
    j["lambda"] = r.lambda;
    j["residual"] = r.residual;
    j["iterations"] = r.iterations;
    j["restarts"] = r.restarts;
    j["converged"] = r.converged;
    j["grid"] = Json{{"lo", r.lo}, {"hi", r.hi}, {"M", r.hi}, {"N", r.nodes}, {"dim", r.dim}, {"scheme", to_string(r.scheme)}};
    j["tilt"] = r.tilt;
    if (with_eigenfunction) j["eigenfunction"] = r.eigenfunction;
    return j;
}

Json to_json(const RegimeReport& r) {
    Json j{{"regime", to_string(r.regime)}, {"label", r.label}};
    if (r.rho) j["rho"] = *r.rho;
    return j;
}

Json to_json(const SweepPoint& p) {
    return Json{{"M", p.M}, {"N", p.N}, {"lambda", p.lambda}, {"residual", p.residual},
                {"iterations", p.iterations}, {"converged", p.converged}, {"cauchy", p.cauchy}};
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace persistx
