#include "persistx/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "persistx/error.hpp"
#include "persistx/parallel.hpp"

namespace persistx {

std::string to_string(Estimator e) { return e == Estimator::Crude ? "crude" : "splitting"; }

Estimator parse_estimator(const std::string& tag) {
    if (tag == "crude") return Estimator::Crude;
    if (tag == "splitting") return Estimator::Splitting;
    throw InvalidArgument("unknown estimator '" + tag + "' (expected crude | splitting)");
}

namespace {

// Flattened view of a model's Markov transition.  `prefix` is the number of Z
// values fixed by the initial state (p for AR, 1 for MA).
struct Dynamics {
    explicit Dynamics(const ProcessModel& m)
        : model(m),
          is_ar(std::holds_alternative<ARModel>(m)),
          coeffs(model_coeffs(m).begin(), model_coeffs(m).end()),
          innovation(model_innovation(m)),
          convention(model_convention(m)),
          dim(coeffs.size()),
          prefix(is_ar ? coeffs.size() : 1) {}

    const ProcessModel& model;
    bool is_ar;
    std::vector<double> coeffs;
    InnovationDistribution innovation;
    SurvivalConvention convention;
    std::size_t dim;
    std::size_t prefix;

    // state: dim values; obs: prefix values; scratch: dim + 1 values.
    void init(double* state, double* obs, double* scratch, RandomStream& rs) const {
        if (is_ar) {
            const auto x = sample_initial(std::get<ARModel>(model).initial(), dim, rs);
            std::copy(x.begin(), x.end(), state);
            std::copy(x.begin(), x.end(), obs);
            return;
        }
        for (std::size_t k = 0; k <= dim; ++k) scratch[k] = innovation.sample(rs);  // xi_{-q}..xi_0
        double z = scratch[dim];
        for (std::size_t j = 1; j <= dim; ++j) z += coeffs[j - 1] * scratch[dim - j];
        obs[0] = z;
        std::copy(scratch + 1, scratch + dim + 1, state);
    }

    double step(double* state, RandomStream& rs) const {
        const double xi = innovation.sample(rs);
        double drift = 0.0;
        for (std::size_t j = 1; j <= dim; ++j) drift += coeffs[j - 1] * state[dim - j];
        const double z = drift + xi;
        std::copy(state + 1, state + dim, state);
        state[dim - 1] = is_ar ? z : xi;
        return z;
    }
};

void check_horizons(const std::vector<int>& horizons) {
    if (horizons.empty()) throw InvalidArgument("horizon grid is empty");
    if (horizons.front() < 0) throw InvalidArgument("horizons must be nonnegative");
    for (std::size_t i = 1; i < horizons.size(); ++i)
        if (horizons[i] <= horizons[i - 1]) throw InvalidArgument("horizons must be strictly increasing");
}

void fill_window_slopes(PersistenceEstimate& est) {
    est.window_slopes.clear();
    for (std::size_t i = 0; i + 1 < est.table.size(); ++i) {
        const auto& a = est.table[i];
        const auto& b = est.table[i + 1];
        if (!std::isfinite(a.log_p_hat) || !std::isfinite(b.log_p_hat)) break;
        est.window_slopes.push_back({a.n, b.n, (b.log_p_hat - a.log_p_hat) / (b.n - a.n)});
    }
}

void fill_default_fit(PersistenceEstimate& est, std::uint64_t min_count) {
    if (auto w = default_window(est, min_count)) est.fit = fit_exponent(est, w->first, w->second);
}

} // namespace

MarkovState draw_initial_state(const ProcessModel& model, RandomStream& stream, std::vector<double>& observed) {
    const Dynamics dyn(model);
    MarkovState s{std::vector<double>(dyn.dim)};
    observed.assign(dyn.prefix, 0.0);
    std::vector<double> scratch(dyn.dim + 1);
    dyn.init(s.window.data(), observed.data(), scratch.data(), stream);
    return s;
}

double advance(const ProcessModel& model, std::span<double> state, RandomStream& stream) {
    const Dynamics dyn(model);
    if (state.size() != dyn.dim) throw DimensionMismatch("Markov state length does not match model order");
    return dyn.step(state.data(), stream);
}

std::vector<double> simulate_ar_path(const ARModel& model, int n, RandomStream& stream) {
    const auto p = static_cast<int>(model.order());
    if (n + 1 < p) throw InvalidArgument("AR path of length n+1 must cover the p initial values");
    const ProcessModel pm = model;
    const Dynamics dyn(pm);
    std::vector<double> z(static_cast<std::size_t>(n) + 1);
    std::vector<double> state(dyn.dim), scratch(dyn.dim + 1);
    dyn.init(state.data(), z.data(), scratch.data(), stream);
    for (int i = p; i <= n; ++i) z[i] = dyn.step(state.data(), stream);
    return z;
}

std::vector<double> simulate_ma_path(const MAModel& model, int n, RandomStream& stream) {
    if (n < 0) throw InvalidArgument("MA path needs n >= 0");
    const ProcessModel pm = model;
    const Dynamics dyn(pm);
    std::vector<double> z(static_cast<std::size_t>(n) + 1);
    std::vector<double> state(dyn.dim), scratch(dyn.dim + 1);
    dyn.init(state.data(), z.data(), scratch.data(), stream);
    for (int i = 1; i <= n; ++i) z[i] = dyn.step(state.data(), stream);
    return z;
}

std::vector<int> horizon_range(int n_max, int n_min) {
    std::vector<int> h;
    for (int n = n_min; n <= n_max; ++n) h.push_back(n);
    return h;
}

ExponentFit fit_exponent(const PersistenceEstimate& est, std::size_t first, std::size_t last) {
    if (first > last || last >= est.table.size())
        throw InvalidArgument("fit window out of range of the horizon table");
    if (last == first) throw InvalidArgument("fit window needs at least two horizons");
    const std::size_t k = last - first + 1;
    double nbar = 0.0, ybar = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
        const auto& h = est.table[i];
        if (!(h.p_hat > 0.0) && !std::isfinite(h.log_p_hat))
            throw NonPositiveProbabilityInWindow("p_hat = 0 at n = " + std::to_string(h.n));
        nbar += h.n;
        ybar += h.log_p_hat;
    }
    nbar /= static_cast<double>(k);
    ybar /= static_cast<double>(k);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
        const double dx = est.table[i].n - nbar;
        sxx += dx * dx;
        sxy += dx * (est.table[i].log_p_hat - ybar);
    }
    const double slope = sxy / sxx;
    double var = 0.0;
    for (std::size_t i = first; i <= last; ++i) {
        const auto& h = est.table[i];
        const double c = (h.n - nbar) / sxx;
        const double rel = h.p_hat > 0.0 ? h.se / h.p_hat : 0.0;
        var += c * c * rel * rel;
    }
    ExponentFit f;
    f.slope = slope;
    f.lambda = std::exp(slope);
    f.half_width = 1.96 * f.lambda * std::sqrt(var);
    f.first = first;
    f.last = last;
    return f;
}

std::optional<std::pair<std::size_t, std::size_t>> default_window(const PersistenceEstimate& est,
                                                                  std::uint64_t min_count) {
    std::size_t usable = 0;
    while (usable < est.table.size() && std::isfinite(est.table[usable].log_p_hat) &&
           est.table[usable].count >= min_count)
        ++usable;
    if (usable < 2) return std::nullopt;
    return std::make_pair(std::min(usable / 2, usable - 2), usable - 1);
}

PersistenceEstimate estimate_crude(const ProcessModel& model, std::vector<int> horizons, std::uint64_t replicates,
                                   std::uint64_t seed, unsigned threads) {
    if (replicates < 1) throw InvalidArgument("crude Monte Carlo needs R >= 1");
    check_horizons(horizons);
    const Dynamics dyn(model);
    const int n_max = horizons.back();
    const unsigned workers = resolve_threads(threads);
    const std::size_t chunks = std::min<std::uint64_t>(workers, replicates);

    // death[d] counts replicates whose first failure is at time d; d = n_max + 1 means survival.
    std::vector<std::vector<std::uint64_t>> death(chunks, std::vector<std::uint64_t>(n_max + 2, 0));
    parallel_for(replicates, workers, [&](std::size_t begin, std::size_t end, std::size_t chunk) {
        auto& hist = death[chunk];
        std::vector<double> state(dyn.dim), obs(dyn.prefix), scratch(dyn.dim + 1);
        for (std::size_t r = begin; r < end; ++r) {
            RandomStream rs(seed, "replicate", r);
            dyn.init(state.data(), obs.data(), scratch.data(), rs);
            int d = 0;
            const int observed = static_cast<int>(dyn.prefix);
            while (d < observed && d <= n_max && survives(obs[d], dyn.convention)) ++d;
            if (d == observed)
                while (d <= n_max && survives(dyn.step(state.data(), rs), dyn.convention)) ++d;
            ++hist[static_cast<std::size_t>(d)];
        }
    });
    std::vector<std::uint64_t> total(n_max + 2, 0);
    for (const auto& h : death)
        for (std::size_t i = 0; i < h.size(); ++i) total[i] += h[i];

    PersistenceEstimate est;
    est.method = Estimator::Crude;
    est.seed = seed;
    est.samples = replicates;
    std::uint64_t dead = 0;
    std::size_t next = 0;
    const double R = static_cast<double>(replicates);
    for (int n = 0; n <= n_max; ++n) {
        dead += total[n];
        if (next < horizons.size() && horizons[next] == n) {
            HorizonEstimate h;
            h.n = n;
            h.count = replicates - dead;
            h.p_hat = static_cast<double>(h.count) / R;
            h.log_p_hat = h.count ? std::log(h.p_hat) : -std::numeric_limits<double>::infinity();
            h.se = std::sqrt(h.p_hat * (1.0 - h.p_hat) / R);
            est.table.push_back(h);
            ++next;
        }
    }
    if (est.table.front().count == 0)
        throw AllPathsDied("every replicate died by n = " + std::to_string(horizons.front()) +
                           "; use the splitting estimator");
    fill_window_slopes(est);
    fill_default_fit(est, kCrudeMinWindowCount);
    return est;
}

PersistenceEstimate estimate_splitting(const ProcessModel& model, std::vector<int> horizons,
                                       std::uint64_t particles, std::uint64_t seed, unsigned threads) {
    if (particles < 2) throw InvalidArgument("splitting needs P >= 2 particles");
    check_horizons(horizons);
    const Dynamics dyn(model);
    const int n_max = horizons.back();
    const std::size_t P = particles;
    const std::size_t d = dyn.dim;
    const unsigned workers = resolve_threads(threads);

    std::vector<double> states(P * d), next_states(P * d);
    std::vector<int> fate(P);  // initial phase: first failing observed time; stepping phase: 1 alive, 0 dead

    parallel_for(P, workers, [&](std::size_t begin, std::size_t end, std::size_t) {
        std::vector<double> obs(dyn.prefix), scratch(d + 1);
        for (std::size_t j = begin; j < end; ++j) {
            RandomStream rs(seed, "init", j);
            dyn.init(&states[j * d], obs.data(), scratch.data(), rs);
            int t = 0;
            while (t < static_cast<int>(dyn.prefix) && survives(obs[t], dyn.convention)) ++t;
            fate[j] = t;
        }
    });

    std::vector<double> fractions;
    std::vector<std::uint64_t> counts;
    std::vector<std::size_t> alive;
    alive.reserve(P);

    auto resample = [&](std::size_t step) {
        RandomStream rs(seed, "resample", step);
        const double c = static_cast<double>(alive.size());
        for (std::size_t j = 0; j < P; ++j) {
            auto pick = static_cast<std::size_t>(rs.uniform() * c);
            pick = std::min(pick, alive.size() - 1);
            std::copy_n(&states[alive[pick] * d], d, &next_states[j * d]);
        }
        states.swap(next_states);
    };

    // Observed prefix: conditional survival fractions without resampling in between.
    const int prefix = static_cast<int>(dyn.prefix);
    std::uint64_t prev = P;
    for (int t = 0; t < prefix && t <= n_max; ++t) {
        std::uint64_t c = 0;
        for (std::size_t j = 0; j < P; ++j) c += fate[j] > t;
        if (c == 0) throw PopulationExtinct("all particles died at step " + std::to_string(t), t);
        fractions.push_back(static_cast<double>(c) / static_cast<double>(prev));
        counts.push_back(c);
        prev = c;
    }
    if (n_max >= prefix) {
        alive.clear();
        for (std::size_t j = 0; j < P; ++j)
            if (fate[j] >= prefix) alive.push_back(j);
        resample(static_cast<std::size_t>(prefix - 1));
    }
    for (int t = prefix; t <= n_max; ++t) {
        parallel_for(P, workers, [&](std::size_t begin, std::size_t end, std::size_t) {
            for (std::size_t j = begin; j < end; ++j) {
                RandomStream rs(seed, "advance", static_cast<std::uint64_t>(t) * P + j);
                fate[j] = survives(dyn.step(&states[j * d], rs), dyn.convention) ? 1 : 0;
            }
        });
        alive.clear();
        for (std::size_t j = 0; j < P; ++j)
            if (fate[j]) alive.push_back(j);
        if (alive.empty()) throw PopulationExtinct("all particles died at step " + std::to_string(t), t);
        fractions.push_back(static_cast<double>(alive.size()) / static_cast<double>(P));
        counts.push_back(alive.size());
        if (t < n_max) resample(static_cast<std::size_t>(t));
    }

    PersistenceEstimate est;
    est.method = Estimator::Splitting;
    est.seed = seed;
    est.samples = particles;
    est.step_fractions = fractions;
    double log_p = 0.0, rel_var = 0.0;
    std::size_t next = 0;
    for (int n = 0; n <= n_max; ++n) {
        const double s = fractions[n];
        log_p += std::log(s);
        // s_t is a binomial proportion out of the particles alive before step t
        const double pool = static_cast<double>(n < prefix && n > 0 ? counts[n - 1] : P);
        rel_var += (1.0 - s) / (pool * s);
        if (next < horizons.size() && horizons[next] == n) {
            HorizonEstimate h;
            h.n = n;
            h.count = counts[n];
            h.log_p_hat = log_p;
            h.p_hat = std::exp(log_p);
            h.se = h.p_hat * std::sqrt(rel_var);
            est.table.push_back(h);
            ++next;
        }
    }
    fill_window_slopes(est);
    fill_default_fit(est, 1);
    return est;
}

} // namespace persistx
