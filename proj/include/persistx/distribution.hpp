#pragma once

#include <string>
#include <variant>

#include "persistx/rng.hpp"

namespace persistx {

double normal_pdf(double x) noexcept;
double normal_cdf(double x) noexcept;
/// Inverse of the standard normal CDF (Wichura, AS241 / PPND16).  Relative
/// accuracy about 1e-16 over (0, 1); this is the only source of Gaussian draws.
double normal_quantile(double u);

namespace law {
struct Uniform {
    double lo;
    double hi;
};
struct Exponential {};  // rate 1
struct Gaussian {
    double sd;  // mean 0
};
struct Rademacher {};
} // namespace law

/// Innovation law F.  Immutable; safe to share across threads.
class InnovationDistribution {
public:
    using Law = std::variant<law::Uniform, law::Exponential, law::Gaussian, law::Rademacher>;

    static InnovationDistribution uniform(double lo, double hi);
    static InnovationDistribution exponential();
    static InnovationDistribution gaussian(double sd = 1.0);
    static InnovationDistribution rademacher();

    /// Parses the shell form used on the command line: `uniform:-1,1`,
    /// `gaussian:1`, `exponential`, `rademacher`.
    static InnovationDistribution parse(const std::string& spec);
    std::string to_string() const;

    const Law& law() const noexcept { return law_; }
    bool has_density() const noexcept;

    double density(double x) const;
    /// The density's analytic formula continued past the support edges
    /// (constant for Uniform, e^{-x} for Exponential).  Quadrature uses it so
    /// that weights moved across a support edge keep a meaningful integrand.
    double density_extension(double x) const;

    double cdf(double x) const noexcept;
    double quantile(double u) const;
    double sample(RandomStream& stream) const { return quantile(stream.uniform()); }

    double support_lo() const noexcept;
    double support_hi() const noexcept;

    /// P(xi > 0).
    double prob_positive() const noexcept { return 1.0 - cdf(0.0); }

    /// Smallest M with P(|xi| > M) <= mass.
    double tail_bound(double mass) const;

    /// Exponential decay rate r of the density tails, phi(t) <= C e^{-r|t|};
    /// infinity for bounded support or Gaussian tails.
    double tail_decay_rate() const noexcept;

    bool operator==(const InnovationDistribution& other) const noexcept;

private:
    explicit InnovationDistribution(Law l) : law_(l) {}
    Law law_;
};

} // namespace persistx
