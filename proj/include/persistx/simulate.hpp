#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "persistx/model.hpp"
#include "persistx/rng.hpp"

namespace persistx {

enum class Estimator { Crude, Splitting };
std::string to_string(Estimator e);
Estimator parse_estimator(const std::string& tag);

/// Markov representation of a path: the last p values of an AR(p) process,
/// or the last q innovations of an MA(q) process, oldest first.
struct MarkovState {
    std::vector<double> window;
};

/// Draws the state at time p-1 (AR) or 0 (MA).  `observed` receives the Z
/// values already determined by it (Z_0..Z_{p-1} for AR, Z_0 for MA).
MarkovState draw_initial_state(const ProcessModel& model, RandomStream& stream, std::vector<double>& observed);

/// One transition; returns the new Z and shifts the state in place.
double advance(const ProcessModel& model, std::span<double> state, RandomStream& stream);

/// Z_0..Z_n.  Requires n + 1 >= p.
std::vector<double> simulate_ar_path(const ARModel& model, int n, RandomStream& stream);
/// Z_0..Z_n from xi_{-q}..xi_n drawn in that order.
std::vector<double> simulate_ma_path(const MAModel& model, int n, RandomStream& stream);

struct HorizonEstimate {
    int n = 0;
    double p_hat = 0.0;
    double log_p_hat = 0.0;  // kept separately so splitting estimates below 1e-308 stay usable
    double se = 0.0;
    std::uint64_t count = 0;  // surviving replicates (crude) or particles after step n (splitting)
};

struct ExponentFit {
    double lambda = 0.0;
    double half_width = 0.0;
    double slope = 0.0;
    std::size_t first = 0;  // inclusive indices into the horizon table
    std::size_t last = 0;
};

struct WindowSlope {
    int n_from = 0;
    int n_to = 0;
    double slope = 0.0;
};

struct PersistenceEstimate {
    Estimator method = Estimator::Crude;
    std::uint64_t seed = 0;
    std::uint64_t samples = 0;  // replicates or particles
    std::vector<HorizonEstimate> table;
    std::vector<WindowSlope> window_slopes;
    std::vector<double> step_fractions;  // splitting only: s_t for t = 0..n_max
    std::optional<ExponentFit> fit;      // over the default window, when it has >= 2 usable points
};

/// Least-squares slope of log p_hat against n over table[first..last]; lambda
/// = exp(slope); the half-width is 1.96 sigma, with sigma propagated from the
/// per-horizon relative standard errors.
ExponentFit fit_exponent(const PersistenceEstimate& estimate, std::size_t first, std::size_t last);

/// Last half of the usable prefix of the horizon table.  A horizon is usable
/// while p_hat > 0 and its count reaches `min_count`.
std::optional<std::pair<std::size_t, std::size_t>> default_window(const PersistenceEstimate& estimate,
                                                                  std::uint64_t min_count);

inline constexpr std::uint64_t kCrudeMinWindowCount = 25;

PersistenceEstimate estimate_crude(const ProcessModel& model, std::vector<int> horizons, std::uint64_t replicates,
                                   std::uint64_t seed, unsigned threads = 1);

PersistenceEstimate estimate_splitting(const ProcessModel& model, std::vector<int> horizons,
                                       std::uint64_t particles, std::uint64_t seed, unsigned threads = 1);

/// 1..n_max.
std::vector<int> horizon_range(int n_max, int n_min = 1);

} // namespace persistx
