#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "persistx/error.hpp"
#include "persistx/model.hpp"
#include "persistx/quadrature.hpp"

namespace persistx {

enum class ProcessKind { AR, MA };
std::string to_string(ProcessKind k);

struct OperatorMetadata {
    ProcessKind kind = ProcessKind::AR;
    std::vector<double> coeffs;
    std::string innovation;
    double tilt = 0.0;
    CutCorrection correction = CutCorrection::MomentMatched;
};

/// Nystrom discretization of a persistence operator on a tensor grid.
///
/// A state s = (x_1..x_d) maps to the states (x_2..x_d, y_k), k = 0..N-1, so
/// each state carries one row of N weights; the image index is
/// (s mod N^{d-1}) * N + k.  Storage is N^d x N and one application costs
/// O(N^{d+1}).  All weights are nonnegative.
class DiscretizedOperator {
public:
    DiscretizedOperator(QuadratureGrid grid, OperatorMetadata meta, std::vector<double> rows,
                        std::vector<std::size_t> row_begin, std::vector<std::size_t> row_end);

    const QuadratureGrid& grid() const noexcept { return grid_; }
    const OperatorMetadata& metadata() const noexcept { return meta_; }
    std::size_t size() const noexcept { return grid_.state_count(); }

    void apply(std::span<const double> in, std::span<double> out, unsigned threads = 1) const;
    std::vector<double> apply(std::span<const double> in, unsigned threads = 1) const;

    /// Weight of the transition state -> (state mod N^{d-1}) * N + k.
    double weight(std::size_t state, std::size_t k) const noexcept { return rows_[state * n_ + k]; }

    /// ||K 1||_inf, an upper bound on the spectral radius.
    double norm_bound() const;

    /// Full size() x size() matrix, row-major.  Only for size() <= kDenseLimit.
    std::vector<double> to_dense() const;
    static constexpr std::size_t kDenseLimit = 4096;

private:
    QuadratureGrid grid_;
    OperatorMetadata meta_;
    std::size_t n_;
    std::size_t tail_;  // N^{d-1}
    std::vector<double> rows_;
    std::vector<std::size_t> row_begin_, row_end_;  // nonzero range of each row
};

/// (Kg)(x) = int_0^M g(x_2..x_p, z) phi(z - s(x)) dz, s(x) = sum_j a_j x_{p+1-j},
/// times e^{tilt (z - x_1)} (conjugation by h(x) = e^{tilt sum x_j}).  The grid
/// axis must start at 0.
DiscretizedOperator assemble_ar(const ARModel& model, const QuadratureGrid& grid, double tilt = 0.0,
                                CutCorrection correction = CutCorrection::MomentMatched);

/// (Kg)(x) = sum_k w_k(x) phi(y_k) g(x_2..x_q, y_k), the weights w(x) integrating
/// over y > -sum_j a_j x_{q+1-j}.
DiscretizedOperator assemble_ma(const MAModel& model, const QuadratureGrid& grid,
                                CutCorrection correction = CutCorrection::MomentMatched);

struct SpectralResult {
    double lambda = 0.0;
    std::vector<double> eigenfunction;  // sup-norm 1, nonnegative
    double residual = 0.0;              // ||K psi - lambda psi||_inf
    std::size_t iterations = 0;
    std::size_t restarts = 0;  // 2-cycle restarts
    bool converged = false;
    double lo = 0.0, hi = 0.0;
    std::size_t nodes = 0;
    std::size_t dim = 0;
    QuadratureScheme scheme = QuadratureScheme::GaussLegendre;
    double tilt = 0.0;
};

class MaxIterationsExceeded : public Error {
public:
    MaxIterationsExceeded(const std::string& what, SpectralResult best) : Error(what), best_(std::move(best)) {}
    const SpectralResult& best() const noexcept { return best_; }

private:
    SpectralResult best_;
};

inline constexpr double kDefaultTolerance = 1e-10;
inline constexpr std::size_t kDefaultMaxIterations = 200000;

/// Power iteration from the all-ones vector with sup-norm normalization.
SpectralResult spectral_radius(const DiscretizedOperator& op, double tol = kDefaultTolerance,
                               std::size_t max_iter = kDefaultMaxIterations, unsigned threads = 1);

// Defaults.

/// 1.5 times the smallest M with P(|xi| > M) <= 1e-10.
double default_truncation(const InnovationDistribution& innovation);
/// Half the innovation's exponential tail rate (capped at 1) divided by p when
/// some a_j > 0; zero otherwise.
double default_tilt(const ARModel& model);
/// [0, M], shrunk to [0, min(M, sup xi)] when all a_j <= 0 (the process cannot exceed sup xi then).
std::pair<double, double> default_ar_axis(const ARModel& model, double M);
/// [-M, M] clipped to the innovation support.
std::pair<double, double> default_ma_axis(const MAModel& model, double M);

struct OperatorSettings {
    std::optional<double> truncation;  // M
    std::size_t nodes = 400;           // N per axis
    QuadratureScheme scheme = QuadratureScheme::GaussLegendre;
    std::optional<double> tilt;  // AR only
    CutCorrection correction = CutCorrection::MomentMatched;
    double tol = kDefaultTolerance;
    std::size_t max_iter = kDefaultMaxIterations;
    unsigned threads = 1;
};

DiscretizedOperator assemble(const ProcessModel& model, const OperatorSettings& settings);
SpectralResult operator_exponent(const ProcessModel& model, const OperatorSettings& settings);

struct SweepPoint {
    double M = 0.0;
    std::size_t N = 0;
    double lambda = 0.0;
    double residual = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    double cauchy = 0.0;  // |lambda(M, N) - lambda(M_max, N_max)|
};

/// Full factorial over Ms x Ns (row order: M outer, N inner).
std::vector<SweepPoint> convergence_sweep(const ProcessModel& model, const std::vector<double>& Ms,
                                          const std::vector<std::size_t>& Ns, const OperatorSettings& base);

} // namespace persistx
