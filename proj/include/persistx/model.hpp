#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "persistx/distribution.hpp"
#include "persistx/rng.hpp"

namespace persistx {

/// Which event counts as "survival" at a single time: Z >= 0 or Z > 0.
enum class SurvivalConvention { NonNegative, StrictlyPositive };

inline bool survives(double z, SurvivalConvention c) noexcept {
    return c == SurvivalConvention::NonNegative ? z >= 0.0 : z > 0.0;
}

std::string to_string(SurvivalConvention c);
SurvivalConvention parse_convention(const std::string& tag);  // "ge" | "gt"

namespace initial {
struct PointMass {
    std::vector<double> x0;
};
/// Z_0..Z_{p-1} i.i.d. from `law`.
struct IIDInnovation {
    InnovationDistribution law;
};
/// N(0, 1/(1 - a1^2)), the stationary law of a standard Gaussian AR(1).
struct StationaryAR1Gaussian {
    double a1;
};
} // namespace initial

class InitialDistribution {
public:
    using Law = std::variant<initial::PointMass, initial::IIDInnovation, initial::StationaryAR1Gaussian>;

    static InitialDistribution point_mass(std::vector<double> x0);
    static InitialDistribution iid(InnovationDistribution law);
    static InitialDistribution stationary_ar1_gaussian(double a1);

    const Law& law() const noexcept { return law_; }

    /// Throws DimensionMismatch when the law cannot produce `order` values.
    void check_order(std::size_t order) const;

    std::string to_string() const;

private:
    explicit InitialDistribution(Law l) : law_(std::move(l)) {}
    Law law_;
};

/// Draws Z_0..Z_{p-1}.
std::vector<double> sample_initial(const InitialDistribution& init, std::size_t order, RandomStream& stream);

/// Z_i = sum_j a_j Z_{i-j} + xi_i for i >= p, Z_0..Z_{p-1} ~ initial law.
class ARModel {
public:
    ARModel(std::vector<double> coeffs, InnovationDistribution innovation, InitialDistribution initial,
            SurvivalConvention convention = SurvivalConvention::NonNegative);

    std::size_t order() const noexcept { return coeffs_.size(); }
    std::span<const double> coeffs() const noexcept { return coeffs_; }
    const InnovationDistribution& innovation() const noexcept { return innovation_; }
    const InitialDistribution& initial() const noexcept { return initial_; }
    SurvivalConvention convention() const noexcept { return convention_; }

    ARModel with_coeffs(std::vector<double> coeffs) const;

private:
    std::vector<double> coeffs_;
    InnovationDistribution innovation_;
    InitialDistribution initial_;
    SurvivalConvention convention_;
};

/// Z_i = xi_i + sum_j a_j xi_{i-j} for i >= 0, driven by xi_{-q}, xi_{-q+1}, ...
class MAModel {
public:
    MAModel(std::vector<double> coeffs, InnovationDistribution innovation,
            SurvivalConvention convention = SurvivalConvention::NonNegative);

    std::size_t order() const noexcept { return coeffs_.size(); }
    std::span<const double> coeffs() const noexcept { return coeffs_; }
    const InnovationDistribution& innovation() const noexcept { return innovation_; }
    SurvivalConvention convention() const noexcept { return convention_; }

    MAModel with_coeffs(std::vector<double> coeffs) const;

private:
    std::vector<double> coeffs_;
    InnovationDistribution innovation_;
    SurvivalConvention convention_;
};

using ProcessModel = std::variant<ARModel, MAModel>;

inline std::size_t model_order(const ProcessModel& m) {
    return std::visit([](const auto& x) { return x.order(); }, m);
}
inline std::span<const double> model_coeffs(const ProcessModel& m) {
    return std::visit([](const auto& x) { return x.coeffs(); }, m);
}
inline const InnovationDistribution& model_innovation(const ProcessModel& m) {
    return std::visit([](const auto& x) -> const InnovationDistribution& { return x.innovation(); }, m);
}
inline SurvivalConvention model_convention(const ProcessModel& m) {
    return std::visit([](const auto& x) { return x.convention(); }, m);
}
ProcessModel with_coeffs(const ProcessModel& m, std::vector<double> coeffs);
ProcessModel with_convention(const ProcessModel& m, SurvivalConvention c);
std::string describe(const ProcessModel& m);

} // namespace persistx
