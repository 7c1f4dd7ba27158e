#include "persistx/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "persistx/parallel.hpp"

namespace persistx {

std::string to_string(ProcessKind k) { return k == ProcessKind::AR ? "ar" : "ma"; }

DiscretizedOperator::DiscretizedOperator(QuadratureGrid grid, OperatorMetadata meta, std::vector<double> rows,
                                         std::vector<std::size_t> row_begin, std::vector<std::size_t> row_end)
    : grid_(std::move(grid)),
      meta_(std::move(meta)),
      n_(grid_.nodes_per_axis()),
      tail_(grid_.state_count() / grid_.nodes_per_axis()),
      rows_(std::move(rows)),
      row_begin_(std::move(row_begin)),
      row_end_(std::move(row_end)) {
    const std::size_t s = grid_.state_count();
    if (rows_.size() != s * n_ || row_begin_.size() != s || row_end_.size() != s)
        throw DimensionMismatch("operator storage does not match the grid");
}

void DiscretizedOperator::apply(std::span<const double> in, std::span<double> out, unsigned threads) const {
    const std::size_t s = size();
    if (in.size() != s || out.size() != s) throw DimensionMismatch("vector length does not match operator size");
    auto body = [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t st = begin; st < end; ++st) {
            const double* w = &rows_[st * n_];
            const double* g = &in[(st % tail_) * n_];
            double acc = 0.0;
            for (std::size_t k = row_begin_[st]; k < row_end_[st]; ++k) acc += w[k] * g[k];
            out[st] = acc;
        }
    };
    if (threads <= 1 || s < 4096)
        body(0, s, 0);
    else
        parallel_for(s, threads, body);
}

std::vector<double> DiscretizedOperator::apply(std::span<const double> in, unsigned threads) const {
    std::vector<double> out(size());
    apply(in, out, threads);
    return out;
}

double DiscretizedOperator::norm_bound() const {
    double best = 0.0;
    for (std::size_t st = 0; st < size(); ++st) {
        double acc = 0.0;
        for (std::size_t k = row_begin_[st]; k < row_end_[st]; ++k) acc += rows_[st * n_ + k];
        best = std::max(best, acc);
    }
    return best;
}

std::vector<double> DiscretizedOperator::to_dense() const {
    const std::size_t s = size();
    if (s > kDenseLimit)
        throw InvalidArgument("dense materialization limited to " + std::to_string(kDenseLimit) + " states");
    std::vector<double> m(s * s, 0.0);
    for (std::size_t st = 0; st < s; ++st)
        for (std::size_t k = 0; k < n_; ++k) m[st * s + (st % tail_) * n_ + k] = rows_[st * n_ + k];
    return m;
}

namespace {

// Coordinates x_1..x_d of a state (x_1 most significant).
void decode(std::size_t state, const QuadratureGrid& g, std::vector<double>& x) {
    const std::size_t n = g.nodes_per_axis();
    for (std::size_t i = g.dim; i-- > 0;) {
        x[i] = g.axis.nodes[state % n];
        state /= n;
    }
}

struct RowBuilder {
    std::size_t n;
    std::vector<double> rows;
    std::vector<std::size_t> begin, end;

    RowBuilder(std::size_t states, std::size_t nodes)
        : n(nodes), rows(states * nodes, 0.0), begin(states, 0), end(states, 0) {}

    void finish_row(std::size_t st) {
        const double* w = &rows[st * n];
        std::size_t b = 0, e = n;
        while (b < n && w[b] == 0.0) ++b;
        while (e > b && w[e - 1] == 0.0) --e;
        begin[st] = b;
        end[st] = e;
    }
};

std::vector<double> copy_coeffs(std::span<const double> a) { return {a.begin(), a.end()}; }

} // namespace

DiscretizedOperator assemble_ar(const ARModel& model, const QuadratureGrid& grid, double tilt,
                                CutCorrection correction) {
    const auto& innov = model.innovation();
    if (!innov.has_density()) throw RequestedDensityOfAtomicLaw("AR operator needs an innovation density");
    if (grid.dim != model.order()) throw DimensionMismatch("grid dimension must equal the AR order");
    if (!(grid.axis.hi > 0.0)) throw InvalidArgument("AR truncation M must be positive");
    if (grid.axis.lo != 0.0) throw InvalidArgument("AR grid axis must be [0, M]");
    if (!(tilt >= 0.0)) throw InvalidArgument("tilt must be nonnegative");

    const auto a = model.coeffs();
    const std::size_t p = a.size(), n = grid.nodes_per_axis(), states = grid.state_count();
    const double slo = innov.support_lo(), shi = innov.support_hi();
    RowBuilder rb(states, n);
    std::vector<double> x(p), v(n);
    for (std::size_t st = 0; st < states; ++st) {
        decode(st, grid, x);
        double drift = 0.0;
        for (std::size_t j = 1; j <= p; ++j) drift += a[j - 1] * x[p - j];
        interval_weights(grid.axis, drift + slo, drift + shi, correction, v);
        double* row = &rb.rows[st * n];
        for (std::size_t k = 0; k < n; ++k) {
            if (v[k] == 0.0) continue;
            const double z = grid.axis.nodes[k];
            double w = v[k] * innov.density_extension(z - drift);
            if (tilt > 0.0) w *= std::exp(tilt * (z - x[0]));
            row[k] = w;
        }
        rb.finish_row(st);
    }
    OperatorMetadata meta{ProcessKind::AR, copy_coeffs(a), innov.to_string(), tilt, correction};
    return DiscretizedOperator(grid, std::move(meta), std::move(rb.rows), std::move(rb.begin), std::move(rb.end));
}

DiscretizedOperator assemble_ma(const MAModel& model, const QuadratureGrid& grid, CutCorrection correction) {
    const auto& innov = model.innovation();
    if (!innov.has_density()) throw RequestedDensityOfAtomicLaw("MA operator needs an innovation density");
    if (grid.dim != model.order()) throw DimensionMismatch("grid dimension must equal the MA order");

    const auto a = model.coeffs();
    const std::size_t q = a.size(), n = grid.nodes_per_axis(), states = grid.state_count();
    std::vector<double> dens(n);
    for (std::size_t k = 0; k < n; ++k) dens[k] = innov.density_extension(grid.axis.nodes[k]);
    RowBuilder rb(states, n);
    std::vector<double> x(q), v(n);
    for (std::size_t st = 0; st < states; ++st) {
        decode(st, grid, x);
        double s = 0.0;
        for (std::size_t j = 1; j <= q; ++j) s += a[j - 1] * x[q - j];
        interval_weights(grid.axis, -s, std::numeric_limits<double>::infinity(), correction, v);
        double* row = &rb.rows[st * n];
        for (std::size_t k = 0; k < n; ++k) row[k] = v[k] * dens[k];
        rb.finish_row(st);
    }
    OperatorMetadata meta{ProcessKind::MA, copy_coeffs(a), innov.to_string(), 0.0, correction};
    return DiscretizedOperator(grid, std::move(meta), std::move(rb.rows), std::move(rb.begin), std::move(rb.end));
}

SpectralResult spectral_radius(const DiscretizedOperator& op, double tol, std::size_t max_iter, unsigned threads) {
    if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
    const std::size_t s = op.size();
    SpectralResult res;
    res.lo = op.grid().axis.lo;
    res.hi = op.grid().axis.hi;
    res.nodes = op.grid().nodes_per_axis();
    res.dim = op.grid().dim;
    res.scheme = op.grid().axis.scheme;
    res.tilt = op.metadata().tilt;

    std::vector<double> v(s, 1.0), u(s);
    double lam_prev = std::numeric_limits<double>::quiet_NaN(), lam_prev2 = lam_prev;
    constexpr std::size_t kMaxRestarts = 64;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        op.apply(v, u, threads);
        const double lam = *std::max_element(u.begin(), u.end());
        double r = 0.0;
        for (std::size_t i = 0; i < s; ++i) r = std::max(r, std::abs(u[i] - lam * v[i]));
        res.lambda = lam;
        res.residual = r;
        res.iterations = it;
        res.eigenfunction = v;
        if (lam <= 0.0) {  // nilpotent on the grid
            res.lambda = 0.0;
            res.converged = true;
            return res;
        }
        if (std::abs(lam - lam_prev) < tol && r < tol) {
            res.converged = true;
            return res;
        }
        const double step = std::abs(lam - lam_prev), period2 = std::abs(lam - lam_prev2);
        if (res.restarts < kMaxRestarts && step > 100.0 * tol && period2 < 0.01 * step) {
            // Period-2 oscillation: average the iterate with its image.
            const double rho = std::sqrt(lam * lam_prev);
            double mx = 0.0;
            for (std::size_t i = 0; i < s; ++i) {
                v[i] += u[i] / rho;
                mx = std::max(mx, v[i]);
            }
            for (auto& x : v) x /= mx;
            ++res.restarts;
            lam_prev = lam_prev2 = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        for (std::size_t i = 0; i < s; ++i) v[i] = u[i] / lam;
        lam_prev2 = lam_prev;
        lam_prev = lam;
    }
    throw MaxIterationsExceeded("power iteration did not converge in " + std::to_string(max_iter) +
                                    " iterations (|dlambda|, residual not below tol)",
                                res);
}

double default_truncation(const InnovationDistribution& innovation) { return 1.5 * innovation.tail_bound(1e-10); }

double default_tilt(const ARModel& model) {
    const auto a = model.coeffs();
    if (std::none_of(a.begin(), a.end(), [](double c) { return c > 0.0; })) return 0.0;
    const double rate = std::min(model.innovation().tail_decay_rate(), 1.0);
    return 0.5 * rate / static_cast<double>(a.size());
}

std::pair<double, double> default_ar_axis(const ARModel& model, double M) {
    if (!(M > 0.0)) throw InvalidArgument("truncation M must be positive");
    const auto a = model.coeffs();
    const bool nonpositive = std::all_of(a.begin(), a.end(), [](double c) { return c <= 0.0; });
    const double shi = model.innovation().support_hi();
    if (nonpositive && std::isfinite(shi)) {
        if (!(shi > 0.0)) throw InvalidArgument("innovation has no positive mass; the AR exponent is 0");
        return {0.0, std::min(M, shi)};
    }
    return {0.0, M};
}

std::pair<double, double> default_ma_axis(const MAModel& model, double M) {
    if (!(M > 0.0)) throw InvalidArgument("truncation M must be positive");
    const auto& f = model.innovation();
    return {std::max(f.support_lo(), -M), std::min(f.support_hi(), M)};
}

DiscretizedOperator assemble(const ProcessModel& model, const OperatorSettings& st) {
    const double M = st.truncation ? *st.truncation : default_truncation(model_innovation(model));
    if (const auto* ar = std::get_if<ARModel>(&model)) {
        const auto [lo, hi] = default_ar_axis(*ar, M);
        const auto grid = build_grid(lo, hi, st.nodes, ar->order(), st.scheme);
        return assemble_ar(*ar, grid, st.tilt ? *st.tilt : default_tilt(*ar), st.correction);
    }
    const auto& ma = std::get<MAModel>(model);
    const auto [lo, hi] = default_ma_axis(ma, M);
    return assemble_ma(ma, build_grid(lo, hi, st.nodes, ma.order(), st.scheme), st.correction);
}

SpectralResult operator_exponent(const ProcessModel& model, const OperatorSettings& st) {
    return spectral_radius(assemble(model, st), st.tol, st.max_iter, st.threads);
}

std::vector<SweepPoint> convergence_sweep(const ProcessModel& model, const std::vector<double>& Ms,
                                          const std::vector<std::size_t>& Ns, const OperatorSettings& base) {
    if (Ms.empty() || Ns.empty()) throw InvalidArgument("convergence sweep needs nonempty M and N lists");
    std::vector<SweepPoint> out;
    for (double M : Ms)
        for (std::size_t N : Ns) {
            OperatorSettings st = base;
            st.truncation = M;
            st.nodes = N;
            SweepPoint pt;
            pt.M = M;
            pt.N = N;
            SpectralResult r;
            try {
                r = operator_exponent(model, st);
            } catch (const MaxIterationsExceeded& e) {
                r = e.best();
            }
            pt.lambda = r.lambda;
            pt.residual = r.residual;
            pt.iterations = r.iterations;
            pt.converged = r.converged;
            out.push_back(pt);
        }
    const double m_max = *std::max_element(Ms.begin(), Ms.end());
    const std::size_t n_max = *std::max_element(Ns.begin(), Ns.end());
    const auto ref = std::find_if(out.begin(), out.end(), [&](const SweepPoint& p) { return p.M == m_max && p.N == n_max; });
    for (auto& p : out) p.cauchy = std::abs(p.lambda - ref->lambda);
    return out;
}

} // namespace persistx
