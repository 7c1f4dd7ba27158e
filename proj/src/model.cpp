#include "persistx/model.hpp"

#include <cmath>
#include <sstream>

#include "persistx/error.hpp"

namespace persistx {

std::string to_string(SurvivalConvention c) { return c == SurvivalConvention::NonNegative ? "ge" : "gt"; }

SurvivalConvention parse_convention(const std::string& tag) {
    if (tag == "ge") return SurvivalConvention::NonNegative;
    if (tag == "gt") return SurvivalConvention::StrictlyPositive;
    throw InvalidArgument("unknown survival convention '" + tag + "' (expected ge | gt)");
}

InitialDistribution InitialDistribution::point_mass(std::vector<double> x0) {
    if (x0.empty()) throw DimensionMismatch("point-mass initial law needs at least one coordinate");
    return InitialDistribution(initial::PointMass{std::move(x0)});
}

InitialDistribution InitialDistribution::iid(InnovationDistribution law) {
    return InitialDistribution(initial::IIDInnovation{law});
}

InitialDistribution InitialDistribution::stationary_ar1_gaussian(double a1) {
    if (!(std::abs(a1) < 1.0)) throw InvalidArgument("stationary AR(1) initial law requires |a1| < 1");
    return InitialDistribution(initial::StationaryAR1Gaussian{a1});
}

void InitialDistribution::check_order(std::size_t order) const {
    if (auto* pm = std::get_if<initial::PointMass>(&law_); pm && pm->x0.size() != order)
        throw DimensionMismatch("point-mass initial law has " + std::to_string(pm->x0.size()) +
                                " coordinates, model order is " + std::to_string(order));
    if (std::holds_alternative<initial::StationaryAR1Gaussian>(law_) && order != 1)
        throw DimensionMismatch("stationary AR(1) initial law requires order 1");
}

std::string InitialDistribution::to_string() const {
    std::ostringstream os;
    os.precision(17);
    if (auto* pm = std::get_if<initial::PointMass>(&law_)) {
        os << "point:";
        for (std::size_t i = 0; i < pm->x0.size(); ++i) os << (i ? "," : "") << pm->x0[i];
    } else if (auto* iid = std::get_if<initial::IIDInnovation>(&law_)) {
        os << "iid:" << iid->law.to_string();
    } else {
        os << "stationary:" << std::get<initial::StationaryAR1Gaussian>(law_).a1;
    }
    return os.str();
}

std::vector<double> sample_initial(const InitialDistribution& init, std::size_t order, RandomStream& stream) {
    init.check_order(order);
    std::vector<double> out(order);
    if (auto* pm = std::get_if<initial::PointMass>(&init.law())) {
        out = pm->x0;
    } else if (auto* iid = std::get_if<initial::IIDInnovation>(&init.law())) {
        for (auto& v : out) v = iid->law.sample(stream);
    } else {
        const double a1 = std::get<initial::StationaryAR1Gaussian>(init.law()).a1;
        out[0] = normal_quantile(stream.uniform()) / std::sqrt(1.0 - a1 * a1);
    }
    return out;
}

namespace {
void require_finite(const std::vector<double>& a) {
    for (double x : a)
        if (!std::isfinite(x)) throw InvalidArgument("model coefficients must be finite");
}
} // namespace

ARModel::ARModel(std::vector<double> coeffs, InnovationDistribution innovation, InitialDistribution initial,
                 SurvivalConvention convention)
    : coeffs_(std::move(coeffs)), innovation_(innovation), initial_(std::move(initial)), convention_(convention) {
    if (coeffs_.empty()) throw DimensionMismatch("AR model needs order p >= 1");
    require_finite(coeffs_);
    initial_.check_order(coeffs_.size());
}

ARModel ARModel::with_coeffs(std::vector<double> coeffs) const {
    return ARModel(std::move(coeffs), innovation_, initial_, convention_);
}

MAModel::MAModel(std::vector<double> coeffs, InnovationDistribution innovation, SurvivalConvention convention)
    : coeffs_(std::move(coeffs)), innovation_(innovation), convention_(convention) {
    if (coeffs_.empty()) throw DimensionMismatch("MA model needs order q >= 1");
    require_finite(coeffs_);
}

MAModel MAModel::with_coeffs(std::vector<double> coeffs) const {
    return MAModel(std::move(coeffs), innovation_, convention_);
}

ProcessModel with_coeffs(const ProcessModel& m, std::vector<double> coeffs) {
    return std::visit([&](const auto& x) -> ProcessModel { return x.with_coeffs(std::move(coeffs)); }, m);
}

ProcessModel with_convention(const ProcessModel& m, SurvivalConvention c) {
    if (auto* ar = std::get_if<ARModel>(&m))
        return ARModel(std::vector<double>(ar->coeffs().begin(), ar->coeffs().end()), ar->innovation(),
                       ar->initial(), c);
    const auto& ma = std::get<MAModel>(m);
    return MAModel(std::vector<double>(ma.coeffs().begin(), ma.coeffs().end()), ma.innovation(), c);
}

std::string describe(const ProcessModel& m) {
    std::ostringstream os;
    os.precision(17);
    const bool ar = std::holds_alternative<ARModel>(m);
    os << (ar ? "AR(" : "MA(") << model_order(m) << ") a=(";
    const auto a = model_coeffs(m);
    for (std::size_t i = 0; i < a.size(); ++i) os << (i ? "," : "") << a[i];
    os << ") " << model_innovation(m).to_string();
    if (ar) os << " init=" << std::get<ARModel>(m).initial().to_string();
    os << " conv=" << to_string(model_convention(m));
    return os.str();
}

} // namespace persistx
