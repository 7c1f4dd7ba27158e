#include "persistx/distribution.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "persistx/error.hpp"

namespace persistx {

namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double parse_number(const std::string& token, const std::string& spec) {
    try {
        std::size_t used = 0;
        const double v = std::stod(token, &used);
        if (used != token.size()) throw std::invalid_argument(token);
        return v;
    } catch (const std::exception&) {
        throw InvalidArgument("innovation '" + spec + "': '" + token + "' is not a number");
    }
}

} // namespace

double normal_pdf(double x) noexcept { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        throw InvalidArgument("normal_quantile: probability outside [0, 1]");
    }
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
                     6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
                   1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
                 1.3314166789178437745e+2) * r + 3.3871328727963666080e+0) /
               (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
                     3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
                   5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
                 4.2313330701600911252e+1) * r + 1.0);
    }
    double r = std::sqrt(-std::log(q < 0.0 ? p : 1.0 - p));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                      2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
                    3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
                  4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
                (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                      1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                    6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
                  2.05319162663775882187e+0) * r + 1.0);
    } else {
        r -= 5.0;
        value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                      1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                    2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
                  5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
                (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                      1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                    1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                  5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -value : value;
}

InnovationDistribution InnovationDistribution::uniform(double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
        throw InvalidArgument("uniform innovation requires finite lo < hi");
    return InnovationDistribution(law::Uniform{lo, hi});
}

InnovationDistribution InnovationDistribution::exponential() {
    return InnovationDistribution(law::Exponential{});
}

InnovationDistribution InnovationDistribution::gaussian(double sd) {
    if (!(sd > 0.0) || !std::isfinite(sd)) throw InvalidArgument("gaussian innovation requires sd > 0");
    return InnovationDistribution(law::Gaussian{sd});
}

InnovationDistribution InnovationDistribution::rademacher() {
    return InnovationDistribution(law::Rademacher{});
}

InnovationDistribution InnovationDistribution::parse(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    std::vector<double> params;
    if (colon != std::string::npos) {
        std::stringstream rest(spec.substr(colon + 1));
        std::string token;
        while (std::getline(rest, token, ',')) params.push_back(parse_number(token, spec));
    }
    auto expect = [&](std::size_t count) {
        if (params.size() != count)
            throw InvalidArgument("innovation '" + spec + "': expected " + std::to_string(count) +
                                  " parameter(s)");
    };
    if (kind == "uniform") {
        expect(2);
        return uniform(params[0], params[1]);
    }
    if (kind == "gaussian" || kind == "normal") {
        if (params.empty()) return gaussian(1.0);
        expect(1);
        return gaussian(params[0]);
    }
    if (kind == "exponential") {
        expect(0);
        return exponential();
    }
    if (kind == "rademacher") {
        expect(0);
        return rademacher();
    }
    throw InvalidArgument("unknown innovation kind '" + kind +
                          "' (expected uniform:lo,hi | gaussian:sd | exponential | rademacher)");
}

std::string InnovationDistribution::to_string() const {
    std::ostringstream os;
    os.precision(17);
    std::visit(overloaded{
                   [&](const law::Uniform& u) { os << "uniform:" << u.lo << ',' << u.hi; },
                   [&](const law::Exponential&) { os << "exponential"; },
                   [&](const law::Gaussian& g) { os << "gaussian:" << g.sd; },
                   [&](const law::Rademacher&) { os << "rademacher"; },
               },
               law_);
    return os.str();
}

bool InnovationDistribution::has_density() const noexcept {
    return !std::holds_alternative<law::Rademacher>(law_);
}

double InnovationDistribution::density(double x) const {
    return std::visit(overloaded{
                          [&](const law::Uniform& u) { return (x > u.lo && x < u.hi) ? 1.0 / (u.hi - u.lo) : 0.0; },
                          [&](const law::Exponential&) { return x >= 0.0 ? std::exp(-x) : 0.0; },
                          [&](const law::Gaussian& g) { return normal_pdf(x / g.sd) / g.sd; },
                          [&](const law::Rademacher&) -> double {
                              throw RequestedDensityOfAtomicLaw("Rademacher law has no density");
                          },
                      },
                      law_);
}

double InnovationDistribution::density_extension(double x) const {
    return std::visit(overloaded{
                          [&](const law::Uniform& u) { return 1.0 / (u.hi - u.lo); },
                          [&](const law::Exponential&) { return std::exp(-x); },
                          [&](const law::Gaussian& g) { return normal_pdf(x / g.sd) / g.sd; },
                          [&](const law::Rademacher&) -> double {
                              throw RequestedDensityOfAtomicLaw("Rademacher law has no density");
                          },
                      },
                      law_);
}

double InnovationDistribution::cdf(double x) const noexcept {
    return std::visit(overloaded{
                          [&](const law::Uniform& u) {
                              if (x <= u.lo) return 0.0;
                              if (x >= u.hi) return 1.0;
                              return (x - u.lo) / (u.hi - u.lo);
                          },
                          [&](const law::Exponential&) { return x > 0.0 ? -std::expm1(-x) : 0.0; },
                          [&](const law::Gaussian& g) { return normal_cdf(x / g.sd); },
                          [&](const law::Rademacher&) {
                              if (x < -1.0) return 0.0;
                              if (x < 1.0) return 0.5;
                              return 1.0;
                          },
                      },
                      law_);
}

double InnovationDistribution::quantile(double u) const {
    if (!(u >= 0.0 && u <= 1.0)) throw InvalidArgument("quantile: probability outside [0, 1]");
    return std::visit(overloaded{
                          [&](const law::Uniform& l) { return l.lo + (l.hi - l.lo) * u; },
                          [&](const law::Exponential&) { return -std::log1p(-u); },
                          [&](const law::Gaussian& g) { return g.sd * normal_quantile(u); },
                          [&](const law::Rademacher&) { return u <= 0.5 ? -1.0 : 1.0; },
                      },
                      law_);
}

double InnovationDistribution::support_lo() const noexcept {
    return std::visit(overloaded{
                          [](const law::Uniform& u) { return u.lo; },
                          [](const law::Exponential&) { return 0.0; },
                          [](const law::Gaussian&) { return -std::numeric_limits<double>::infinity(); },
                          [](const law::Rademacher&) { return -1.0; },
                      },
                      law_);
}

double InnovationDistribution::support_hi() const noexcept {
    return std::visit(overloaded{
                          [](const law::Uniform& u) { return u.hi; },
                          [](const law::Exponential&) { return std::numeric_limits<double>::infinity(); },
                          [](const law::Gaussian&) { return std::numeric_limits<double>::infinity(); },
                          [](const law::Rademacher&) { return 1.0; },
                      },
                      law_);
}

double InnovationDistribution::tail_bound(double mass) const {
    if (!(mass > 0.0 && mass < 1.0)) throw InvalidArgument("tail_bound: mass must lie in (0, 1)");
    return std::visit(overloaded{
                          [](const law::Uniform& u) { return std::max(std::abs(u.lo), std::abs(u.hi)); },
                          [&](const law::Exponential&) { return -std::log(mass); },
                          [&](const law::Gaussian& g) { return -g.sd * normal_quantile(0.5 * mass); },
                          [](const law::Rademacher&) { return 1.0; },
                      },
                      law_);
}

double InnovationDistribution::tail_decay_rate() const noexcept {
    if (std::holds_alternative<law::Exponential>(law_)) return 1.0;
    return std::numeric_limits<double>::infinity();
}

bool InnovationDistribution::operator==(const InnovationDistribution& other) const noexcept {
    if (law_.index() != other.law_.index()) return false;
    if (auto* u = std::get_if<law::Uniform>(&law_)) {
        const auto& v = std::get<law::Uniform>(other.law_);
        return u->lo == v.lo && u->hi == v.hi;
    }
    if (auto* g = std::get_if<law::Gaussian>(&law_)) return g->sd == std::get<law::Gaussian>(other.law_).sd;
    return true;
}

} // namespace persistx
