#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "persistx/model.hpp"

namespace persistx {

// Closed-form persistence exponents and exact probabilities.

/// AR(1), a1 = -1, innovation Uniform(-a, b): 2b / (pi (a + b)).
double ar1_uniform_exponent(double a, double b);

/// AR(1) with a1 < 0 and standard exponential innovations:
/// P(Z_0..Z_n >= 0) = (1/(1-a1))^{n-1} E[e^{a1 Z0} 1{Z0 >= 0}] for n >= 1,
/// P(Z0 >= 0) for n = 0.  Initial law: point mass or i.i.d. standard exponential.
double ar1_exponential_pn(double a1, int n, const InitialDistribution& initial);
double ar1_exponential_exponent(double a1);  // 1 / (1 - a1)

/// MA(1), a1 = 1, Uniform(-a, b).  a >= b: 4b / (pi (a + b)); a < b: the
/// largest root in (0, 1) of ma1_uniform_residual.
double ma1_uniform_exponent(double a, double b, double tol = 1e-12);
/// tan(a / ((a+b) l)) - (1 - r/l) / (1 + r/l), r = 1 - 2a/(a+b).
double ma1_uniform_residual(double lambda, double a, double b);
/// Largest root of the residual, scanning down from 1 in steps of 1e-3 and
/// bisecting the first bracket.  Valid for any a <= b (a = b gives 2/pi).
double ma1_uniform_root(double a, double b, double tol = 1e-12);

/// sum_{k=-terms..terms} 2 / (pi/2 + 2 pi k)^{c+2}: the probability that c
/// consecutive pair sums xi_{i-1} + xi_i of a symmetric density are all >= 0.
double ma1_symmetric_series(int c, int terms);

/// MA(1), a1 = 1, Rademacher innovations: P(Z_0..Z_n pass), closed form.
double rademacher_pn(int n, SurvivalConvention convention);
/// Same probability from the two-state chain of the last innovation.
double rademacher_pn_transfer(int n, SurvivalConvention convention);
double rademacher_exponent(SurvivalConvention convention);

/// MA(q=1), standard exponential innovations, a1 in (-1, 0): 1 + a1.
double ma1_exponential_exponent(double a1);
/// e^{a1 x / (1 + a1)} for x >= 0, 1 for x < 0.
double ma1_exponential_eigenfunction(double a1, double x);

/// MA(1), a1 = -1: 1 / (n + 2)!.
double degenerate_factorial_pn(int n);

enum class Regime {
    MADegenerate,
    MANondegenerate,
    ARSupercritical,
    ARContractive,
    ARNonpositive,
    ARUnsupported,
};
std::string to_string(Regime r);

struct RegimeReport {
    Regime regime;
    std::optional<double> rho;  // characteristic root > 1, supercritical AR only
    std::string label;          // human-readable tag used in reports
};

/// MA: degenerate iff sum a_j = -1.  AR: supercritical (a >= 0, sum a_j > 1),
/// else contractive (sum |a_j| < 1), else nonpositive (a <= 0), else unsupported.
RegimeReport classify_regime(const ProcessModel& model);

/// Root rho > 1 of sum_j a_j rho^{-j} = 1 for a >= 0, sum a_j > 1.
double characteristic_root(std::span<const double> a);

/// E[g(xi + shift) | xi + shift > 0] by Gauss-Legendre integration of the density.
double conditional_mean(const InnovationDistribution& law, const std::function<double(double)>& g, double shift,
                        const std::vector<double>& breakpoints = {});

/// Smallest E[g(xi + d) | xi + d > 0] - E[g(xi) | xi > 0] over the step family
/// g_t = 1{x >= t}, t in `thresholds`, and the given shifts.  Nonnegative for
/// log-concave densities.
double logconcave_min_gap(const InnovationDistribution& law, const std::vector<double>& shifts,
                          const std::vector<double>& thresholds);

namespace oracle_case {
struct AR1Uniform { double a, b; };
struct AR1Exponential { double a1; };
struct MA1Uniform { double a, b; };
struct MA1Symmetric { int c; int terms; };
struct MA1Rademacher { SurvivalConvention convention; };
struct MA1Exponential { double a1; };
struct IIDCase { InnovationDistribution law; };
struct DegenerateMA { std::vector<double> coeffs; };
struct SupercriticalAR { std::vector<double> coeffs; };
} // namespace oracle_case

using OracleCase = std::variant<oracle_case::AR1Uniform, oracle_case::AR1Exponential, oracle_case::MA1Uniform,
                                oracle_case::MA1Symmetric, oracle_case::MA1Rademacher, oracle_case::MA1Exponential,
                                oracle_case::IIDCase, oracle_case::DegenerateMA, oracle_case::SupercriticalAR>;

std::string case_tag(const OracleCase& c);

/// Exponent of a case (0 for degenerate MA, 1 for supercritical AR).
double oracle_exponent(const OracleCase& c);

/// Exact p_n for n = 0..n_max where a closed form exists, else empty.
std::vector<double> oracle_pn_table(const OracleCase& c, int n_max);

/// Recognizes models that match an oracle case.
std::optional<OracleCase> match_oracle(const ProcessModel& model);

} // namespace persistx
