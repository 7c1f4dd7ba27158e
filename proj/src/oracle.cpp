#include "persistx/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "persistx/error.hpp"
#include "persistx/quadrature.hpp"

namespace persistx {

using std::numbers::pi;

double ar1_uniform_exponent(double a, double b) {
    if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("ar1_uniform_exponent needs a, b > 0");
    return 2.0 * b / (pi * (a + b));
}

double ar1_exponential_exponent(double a1) {
    if (!(a1 < 0.0)) throw InvalidArgument("AR(1) exponential oracle needs a1 < 0");
    return 1.0 / (1.0 - a1);
}

double ar1_exponential_pn(double a1, int n, const InitialDistribution& initial) {
    const double ratio = ar1_exponential_exponent(a1);
    if (n < 0) throw InvalidArgument("n must be >= 0");
    initial.check_order(1);
    double moment = 0.0, positive = 0.0;  // E[e^{a1 Z0} 1{Z0 >= 0}], P(Z0 >= 0)
    if (const auto* pm = std::get_if<initial::PointMass>(&initial.law())) {
        const double x0 = pm->x0[0];
        positive = x0 >= 0.0 ? 1.0 : 0.0;
        moment = x0 >= 0.0 ? std::exp(a1 * x0) : 0.0;
    } else if (const auto* iid = std::get_if<initial::IIDInnovation>(&initial.law());
               iid && std::holds_alternative<law::Exponential>(iid->law.law())) {
        positive = 1.0;
        moment = 1.0 / (1.0 - a1);
    } else {
        throw UnsupportedInitialLaw("closed form needs a point-mass or standard exponential initial law, got " +
                                    initial.to_string());
    }
    if (n == 0) return positive;
    return std::pow(ratio, n - 1) * moment;
}

double ma1_uniform_residual(double lambda, double a, double b) {
    const double r = 1.0 - 2.0 * a / (a + b);
    return std::tan(a / ((a + b) * lambda)) - (1.0 - r / lambda) / (1.0 + r / lambda);
}

double ma1_uniform_root(double a, double b, double tol) {
    if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("ma1_uniform_root needs a, b > 0");
    if (a > b) throw InvalidArgument("the tan equation describes the a <= b branch");
    constexpr double kStep = 1e-3;
    auto f = [&](double l) { return ma1_uniform_residual(l, a, b); };
    double hi = 1.0, fhi = f(hi);
    for (int i = 1; i < 1000; ++i) {
        const double lo = 1.0 - i * kStep;
        const double flo = f(lo);
        if (fhi == 0.0) return hi;
        if ((flo < 0.0) != (fhi < 0.0)) {
            double l = lo, h = hi, fl = flo;
            double mid = 0.5 * (l + h);
            for (int it = 0; it < 200 && h - l > 2.0 * std::numeric_limits<double>::epsilon() * h; ++it) {
                mid = 0.5 * (l + h);
                const double fm = f(mid);
                if (fm == 0.0) break;
                if ((fm < 0.0) == (fl < 0.0)) {
                    l = mid;
                    fl = fm;
                } else {
                    h = mid;
                }
            }
            // A sign change across a pole of tan is not a root.
            if (std::abs(f(mid)) <= tol) return mid;
        }
        hi = lo;
        fhi = flo;
    }
    throw BracketNotFound("no sign change of the tan equation on (0, 1] for (a, b) = (" + std::to_string(a) +
                          ", " + std::to_string(b) + ")");
}

double ma1_uniform_exponent(double a, double b, double tol) {
    if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("ma1_uniform_exponent needs a, b > 0");
    if (a >= b) return 4.0 * b / (pi * (a + b));
    return ma1_uniform_root(a, b, tol);
}

double ma1_symmetric_series(int c, int terms) {
    if (c < 0) throw InvalidArgument("constraint count c must be >= 0");
    if (terms < 1) throw InvalidArgument("series needs terms >= 1");
    // Pair +k with -k and add the small terms first.
    double sum = 0.0;
    for (int k = terms; k >= 1; --k) {
        sum += 2.0 / std::pow(pi / 2.0 + 2.0 * pi * k, c + 2);
        sum += 2.0 / std::pow(pi / 2.0 - 2.0 * pi * k, c + 2);
    }
    return sum + 2.0 / std::pow(pi / 2.0, c + 2);
}

double rademacher_pn(int n, SurvivalConvention convention) {
    if (n < 0) throw InvalidArgument("n must be >= 0");
    if (convention == SurvivalConvention::StrictlyPositive) return std::pow(0.5, n + 2);
    const double s5 = std::sqrt(5.0);
    return (0.5 + 1.0 / s5) * std::pow((1.0 + s5) / 4.0, n + 1) + (0.5 - 1.0 / s5) * std::pow((1.0 - s5) / 4.0, n + 1);
}

double rademacher_pn_transfer(int n, SurvivalConvention convention) {
    if (n < 0) throw InvalidArgument("n must be >= 0");
    // Mass of surviving paths whose latest innovation is -1 / +1.
    double minus = 0.5, plus = 0.5;
    const bool strict = convention == SurvivalConvention::StrictlyPositive;
    for (int i = 0; i <= n; ++i) {
        // Z_i = xi_{i-1} + xi_i is -2, 0 or 2; it passes unless both are -1 (or, strictly, unless both are +1).
        const double to_minus = strict ? 0.0 : 0.5 * plus;
        const double to_plus = strict ? 0.5 * plus : 0.5 * (minus + plus);
        minus = to_minus;
        plus = to_plus;
    }
    return minus + plus;
}

double rademacher_exponent(SurvivalConvention convention) {
    return convention == SurvivalConvention::StrictlyPositive ? 0.5 : (1.0 + std::sqrt(5.0)) / 4.0;
}

double ma1_exponential_exponent(double a1) {
    if (!(a1 > -1.0 && a1 < 0.0)) throw InvalidArgument("MA(1) exponential oracle needs a1 in (-1, 0)");
    return 1.0 + a1;
}

double ma1_exponential_eigenfunction(double a1, double x) {
    ma1_exponential_exponent(a1);
    return x >= 0.0 ? std::exp(a1 * x / (1.0 + a1)) : 1.0;
}

double degenerate_factorial_pn(int n) {
    if (n < 0) throw InvalidArgument("n must be >= 0");
    if (n <= 18) {
        double f = 1.0;
        for (int k = 2; k <= n + 2; ++k) f *= k;
        return 1.0 / f;
    }
    return std::exp(-std::lgamma(n + 3.0));
}

std::string to_string(Regime r) {
    switch (r) {
    case Regime::MADegenerate: return "ma-degenerate";
    case Regime::MANondegenerate: return "ma-nondegenerate";
    case Regime::ARSupercritical: return "ar-supercritical";
    case Regime::ARContractive: return "ar-contractive";
    case Regime::ARNonpositive: return "ar-nonpositive";
    case Regime::ARUnsupported: return "ar-unsupported";
    }
    return "?";
}

double characteristic_root(std::span<const double> a) {
    double sum = 0.0;
    for (double c : a) {
        if (c < 0.0) throw InvalidArgument("characteristic root needs a >= 0");
        sum += c;
    }
    if (!(sum > 1.0)) throw InvalidArgument("characteristic root needs sum a_j > 1");
    if (a.size() == 1) return a[0];
    auto f = [&](double rho) {
        double s = 0.0, pw = 1.0;
        for (double c : a) {
            pw /= rho;
            s += c * pw;
        }
        return s - 1.0;
    };
    double lo = 1.0, hi = 2.0;
    while (f(hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

RegimeReport classify_regime(const ProcessModel& model) {
    const auto a = model_coeffs(model);
    double sum = 0.0, abs_sum = 0.0;
    bool nonneg = true, nonpos = true;
    for (double c : a) {
        sum += c;
        abs_sum += std::abs(c);
        nonneg = nonneg && c >= 0.0;
        nonpos = nonpos && c <= 0.0;
    }
    if (std::holds_alternative<MAModel>(model)) {
        if (std::abs(sum + 1.0) <= 1e-12) return {Regime::MADegenerate, std::nullopt, "degenerate, beta=0"};
        return {Regime::MANondegenerate, std::nullopt, "nondegenerate"};
    }
    if (nonneg && sum > 1.0)
        return {Regime::ARSupercritical, characteristic_root(a), "supercritical, theta=1"};
    if (abs_sum < 1.0) return {Regime::ARContractive, std::nullopt, "contractive"};
    if (nonpos) return {Regime::ARNonpositive, std::nullopt, "nonpositive coefficients"};
    return {Regime::ARUnsupported, std::nullopt, "unsupported regime - exploratory"};
}

double conditional_mean(const InnovationDistribution& law, const std::function<double(double)>& g, double shift,
                        const std::vector<double>& breakpoints) {
    // xi ranges over (-shift, inf) intersected with the support, cut at 1e-16 tail mass.
    const double tb = law.tail_bound(1e-16);
    const double A = std::max(-shift, std::max(law.support_lo(), -tb));
    const double B = std::min(law.support_hi(), tb);
    const double denom = 1.0 - law.cdf(-shift);
    if (!(B > A) || !(denom > 0.0)) throw InvalidArgument("conditioning event has zero probability");
    std::vector<double> cuts{A, B};
    for (double t : breakpoints)
        if (t - shift > A && t - shift < B) cuts.push_back(t - shift);
    std::sort(cuts.begin(), cuts.end());
    const AxisRule ref = make_axis(0.0, 1.0, 16, QuadratureScheme::GaussLegendre);
    constexpr int kPanels = 64;
    double num = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double h = (cuts[i + 1] - cuts[i]) / kPanels;
        for (int p = 0; p < kPanels; ++p) {
            const double x0 = cuts[i] + p * h;
            for (std::size_t k = 0; k < ref.size(); ++k) {
                const double x = x0 + h * ref.nodes[k];
                num += h * ref.weights[k] * g(x + shift) * law.density(x);
            }
        }
    }
    return num / denom;
}

double logconcave_min_gap(const InnovationDistribution& law, const std::vector<double>& shifts,
                          const std::vector<double>& thresholds) {
    double gap = std::numeric_limits<double>::infinity();
    for (double t : thresholds) {
        const auto g = [t](double x) { return x >= t ? 1.0 : 0.0; };
        const double base = conditional_mean(law, g, 0.0, {t});
        for (double d : shifts) gap = std::min(gap, conditional_mean(law, g, d, {t}) - base);
    }
    return gap;
}

namespace {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
} // namespace

std::string case_tag(const OracleCase& c) {
    return std::visit(overloaded{
                          [](const oracle_case::AR1Uniform&) { return std::string("ar1-uniform"); },
                          [](const oracle_case::AR1Exponential&) { return std::string("ar1-exponential"); },
                          [](const oracle_case::MA1Uniform&) { return std::string("ma1-uniform"); },
                          [](const oracle_case::MA1Symmetric&) { return std::string("ma1-symmetric"); },
                          [](const oracle_case::MA1Rademacher&) { return std::string("ma1-rademacher"); },
                          [](const oracle_case::MA1Exponential&) { return std::string("ma1-exponential"); },
                          [](const oracle_case::IIDCase&) { return std::string("iid"); },
                          [](const oracle_case::DegenerateMA&) { return std::string("degenerate-ma"); },
                          [](const oracle_case::SupercriticalAR&) { return std::string("supercritical-ar"); },
                      },
                      c);
}

double oracle_exponent(const OracleCase& c) {
    return std::visit(overloaded{
                          [](const oracle_case::AR1Uniform& x) { return ar1_uniform_exponent(x.a, x.b); },
                          [](const oracle_case::AR1Exponential& x) { return ar1_exponential_exponent(x.a1); },
                          [](const oracle_case::MA1Uniform& x) { return ma1_uniform_exponent(x.a, x.b); },
                          [](const oracle_case::MA1Symmetric&) { return 2.0 / pi; },
                          [](const oracle_case::MA1Rademacher& x) { return rademacher_exponent(x.convention); },
                          [](const oracle_case::MA1Exponential& x) { return ma1_exponential_exponent(x.a1); },
                          [](const oracle_case::IIDCase& x) {
                              return 1.0 - x.law.cdf(-std::numeric_limits<double>::denorm_min());  // P(xi >= 0)
                          },
                          [](const oracle_case::DegenerateMA&) { return 0.0; },
                          [](const oracle_case::SupercriticalAR&) { return 1.0; },
                      },
                      c);
}

std::vector<double> oracle_pn_table(const OracleCase& c, int n_max) {
    std::vector<double> out;
    if (n_max < 0) return out;
    const auto fill = [&](auto&& f) {
        for (int n = 0; n <= n_max; ++n) out.push_back(f(n));
    };
    std::visit(overloaded{
                   [&](const oracle_case::AR1Exponential& x) {
                       const auto init = InitialDistribution::iid(InnovationDistribution::exponential());
                       fill([&](int n) { return ar1_exponential_pn(x.a1, n, init); });
                   },
                   [&](const oracle_case::MA1Symmetric& x) {
                       fill([&](int n) { return ma1_symmetric_series(n + 1, x.terms); });
                   },
                   [&](const oracle_case::MA1Rademacher& x) {
                       fill([&](int n) { return rademacher_pn(n, x.convention); });
                   },
                   [&](const oracle_case::IIDCase& x) {
                       const double p = oracle_exponent(x);
                       fill([&](int n) { return std::pow(p, n + 1); });
                   },
                   [&](const oracle_case::DegenerateMA& x) {
                       if (x.coeffs.size() == 1) fill(degenerate_factorial_pn);
                   },
                   [](const auto&) {},
               },
               c);
    return out;
}

std::optional<OracleCase> match_oracle(const ProcessModel& model) {
    const auto a = model_coeffs(model);
    const auto& f = model_innovation(model);
    const auto* uni = std::get_if<law::Uniform>(&f.law());
    const bool straddles = uni && uni->lo < 0.0 && uni->hi > 0.0;
    const bool zero = std::all_of(a.begin(), a.end(), [](double c) { return c == 0.0; });

    if (const auto* ar = std::get_if<ARModel>(&model)) {
        const auto regime = classify_regime(model);
        if (regime.regime == Regime::ARSupercritical)
            return oracle_case::SupercriticalAR{std::vector<double>(a.begin(), a.end())};
        const auto* iid = std::get_if<initial::IIDInnovation>(&ar->initial().law());
        if (zero && iid && iid->law == f) return oracle_case::IIDCase{f};
        if (a.size() != 1) return std::nullopt;
        if (a[0] == -1.0 && straddles) return oracle_case::AR1Uniform{-uni->lo, uni->hi};
        if (a[0] < 0.0 && std::holds_alternative<law::Exponential>(f.law()) && iid &&
            std::holds_alternative<law::Exponential>(iid->law.law()))
            return oracle_case::AR1Exponential{a[0]};
        return std::nullopt;
    }
    if (zero) return oracle_case::IIDCase{f};
    if (classify_regime(model).regime == Regime::MADegenerate)
        return oracle_case::DegenerateMA{std::vector<double>(a.begin(), a.end())};
    if (a.size() != 1) return std::nullopt;
    if (a[0] == 1.0) {
        if (straddles) return oracle_case::MA1Uniform{-uni->lo, uni->hi};
        if (std::holds_alternative<law::Gaussian>(f.law())) return oracle_case::MA1Symmetric{0, 200};
        if (std::holds_alternative<law::Rademacher>(f.law()))
            return oracle_case::MA1Rademacher{model_convention(model)};
    }
    if (a[0] > -1.0 && a[0] < 0.0 && std::holds_alternative<law::Exponential>(f.law()))
        return oracle_case::MA1Exponential{a[0]};
    return std::nullopt;
}

} // namespace persistx
