#include "persistx/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "persistx/error.hpp"

namespace persistx {

std::string to_string(QuadratureScheme s) { return s == QuadratureScheme::GaussLegendre ? "gauss-legendre" : "midpoint"; }

QuadratureScheme parse_scheme(const std::string& tag) {
    if (tag == "gauss-legendre" || tag == "gl") return QuadratureScheme::GaussLegendre;
    if (tag == "midpoint") return QuadratureScheme::Midpoint;
    throw InvalidArgument("unknown quadrature scheme '" + tag + "' (expected gauss-legendre | midpoint)");
}

std::string to_string(CutCorrection c) {
    switch (c) {
    case CutCorrection::None: return "none";
    case CutCorrection::CellFraction: return "fraction";
    case CutCorrection::MomentMatched: return "moment";
    }
    return "?";
}

CutCorrection parse_correction(const std::string& tag) {
    if (tag == "none" || tag == "off") return CutCorrection::None;
    if (tag == "fraction") return CutCorrection::CellFraction;
    if (tag == "moment" || tag == "on") return CutCorrection::MomentMatched;
    throw InvalidArgument("unknown cut correction '" + tag + "' (expected none | fraction | moment)");
}

std::size_t AxisRule::cell_of(double c) const noexcept {
    const auto it = std::upper_bound(edges.begin(), edges.end(), c);
    const auto k = static_cast<std::ptrdiff_t>(it - edges.begin()) - 1;
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, static_cast<std::ptrdiff_t>(size()) - 1));
}

namespace {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration on P_n.
void gauss_legendre(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / static_cast<double>(j);
            }
            dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    if (n % 2 == 1) x[n / 2] = 0.0;
}

double ipow(double x, int d) {
    double r = 1.0;
    for (int i = 0; i < d; ++i) r *= x;
    return r;
}

double poly_integral(double a, double b, double center, double scale, int d) {
    const double ta = (a - center) / scale, tb = (b - center) / scale;
    return scale * (ipow(tb, d + 1) - ipow(ta, d + 1)) / (d + 1);
}

// Minimum S^{-1}-norm correction of v0 subject to A v = rhs and v >= 0, with
// S = diag(s).  Nodes whose weight would go negative are pinned to zero one at a time.
bool solve_nonnegative(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs, const Eigen::VectorXd& v0,
                       const Eigen::VectorXd& s, Eigen::VectorXd& v) {
    std::vector<Eigen::Index> free(static_cast<std::size_t>(v0.size()));
    for (Eigen::Index i = 0; i < v0.size(); ++i) free[static_cast<std::size_t>(i)] = i;
    const Eigen::Index rows = A.rows();
    while (static_cast<Eigen::Index>(free.size()) >= rows) {
        const auto nf = static_cast<Eigen::Index>(free.size());
        Eigen::MatrixXd Af(rows, nf);
        Eigen::VectorXd vf0(nf), sf(nf);
        for (Eigen::Index k = 0; k < nf; ++k) {
            Af.col(k) = A.col(free[static_cast<std::size_t>(k)]);
            vf0(k) = v0(free[static_cast<std::size_t>(k)]);
            sf(k) = s(free[static_cast<std::size_t>(k)]);
        }
        const Eigen::MatrixXd ASAt = Af * sf.asDiagonal() * Af.transpose();
        Eigen::FullPivLU<Eigen::MatrixXd> lu(ASAt);
        if (lu.rank() < rows) return false;
        const Eigen::VectorXd mult = lu.solve(rhs - Af * vf0);
        const Eigen::VectorXd vf = vf0 + sf.asDiagonal() * (Af.transpose() * mult);
        Eigen::Index worst = 0;
        if (vf.minCoeff(&worst) >= 0.0) {
            v.setZero(v0.size());
            for (Eigen::Index k = 0; k < nf; ++k) v(free[static_cast<std::size_t>(k)]) = vf(k);
            return true;
        }
        free.erase(free.begin() + worst);
    }
    return false;
}

constexpr std::size_t kHalfWindow = 3;
constexpr int kMaxDegree = 2;

struct Group {
    std::size_t first;
    std::size_t last;  // inclusive
    double center;
    double scale;
};

// Re-solves the weights of cells [g.first, g.last] so that sum_j v_j P_d(y_j)
// equals the integral of P_d over [c1, c2], P_d(t) = ((t - center)/scale)^d.
void match_moments(const AxisRule& ax, double c1, double c2, const Group& g, std::span<double> v) {
    const std::size_t n = ax.size();
    const auto m = static_cast<Eigen::Index>(g.last - g.first + 1);
    auto P = [&](double t, int d) { return ipow((t - g.center) / g.scale, d); };

    for (int deg = kMaxDegree; deg >= 0; --deg) {
        const Eigen::Index rows = deg + 1;
        Eigen::VectorXd rhs(rows);
        if (ax.scheme == QuadratureScheme::Midpoint) {
            // Midpoint cells are individually exact only to degree 1; match the
            // window's own share of [c1, c2] so the error stays local.
            const double a = std::max(c1, ax.edges[g.first]);
            const double b = std::min(c2, ax.edges[g.last + 1]);
            for (int d = 0; d <= deg; ++d) rhs(d) = b > a ? poly_integral(a, b, g.center, g.scale, d) : 0.0;
        } else {
            // The full rule is exact for these polynomials, so the defect can be
            // taken from whichever side of the window has fewer altered nodes.
            std::size_t inside = 0, outside = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j >= g.first && j <= g.last) continue;
                inside += v[j] != 0.0;
                outside += v[j] != ax.weights[j];
            }
            for (int d = 0; d <= deg; ++d) {
                double r = 0.0;
                if (inside <= outside) {
                    r = poly_integral(c1, c2, g.center, g.scale, d);
                    for (std::size_t j = 0; j < n; ++j)
                        if ((j < g.first || j > g.last) && v[j] != 0.0) r -= v[j] * P(ax.nodes[j], d);
                } else {
                    r = -poly_integral(ax.lo, c1, g.center, g.scale, d) - poly_integral(c2, ax.hi, g.center, g.scale, d);
                    for (std::size_t j = g.first; j <= g.last; ++j) r += ax.weights[j] * P(ax.nodes[j], d);
                    for (std::size_t j = 0; j < n; ++j)
                        if ((j < g.first || j > g.last) && v[j] != ax.weights[j])
                            r += (ax.weights[j] - v[j]) * P(ax.nodes[j], d);
                }
                rhs(d) = r;
            }
        }
        Eigen::MatrixXd A(rows, m);
        Eigen::VectorXd v0(m), s(m), sol;
        for (Eigen::Index k = 0; k < m; ++k) {
            const std::size_t j = g.first + static_cast<std::size_t>(k);
            for (int d = 0; d <= deg; ++d) A(d, k) = P(ax.nodes[j], d);
            v0(k) = v[j];
            s(k) = ax.weights[j];
        }
        if (solve_nonnegative(A, rhs, v0, s, sol)) {
            for (Eigen::Index k = 0; k < m; ++k) v[g.first + static_cast<std::size_t>(k)] = sol(k);
            return;
        }
    }
    // No nonnegative solution at any degree: keep the cell fractions.
}

} // namespace

AxisRule make_axis(double lo, double hi, std::size_t n, QuadratureScheme scheme) {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) throw InvalidArgument("quadrature axis needs finite lo < hi");
    if (n < 2) throw InvalidArgument("quadrature axis needs N >= 2 nodes");
    AxisRule ax;
    ax.lo = lo;
    ax.hi = hi;
    ax.scheme = scheme;
    const double half = 0.5 * (hi - lo);
    if (scheme == QuadratureScheme::GaussLegendre) {
        std::vector<double> x, w;
        gauss_legendre(n, x, w);
        ax.nodes.resize(n);
        ax.weights.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            ax.nodes[j] = lo + half * (x[j] + 1.0);
            ax.weights[j] = half * w[j];
        }
    } else {
        const double h = (hi - lo) / static_cast<double>(n);
        ax.nodes.resize(n);
        ax.weights.assign(n, h);
        for (std::size_t j = 0; j < n; ++j) ax.nodes[j] = lo + h * (static_cast<double>(j) + 0.5);
    }
    ax.edges.resize(n + 1);
    ax.edges[0] = lo;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        acc += ax.weights[j];
        ax.edges[j + 1] = lo + acc;
    }
    ax.edges[n] = hi;
    return ax;
}

std::size_t QuadratureGrid::state_count() const noexcept {
    std::size_t s = 1;
    for (std::size_t i = 0; i < dim; ++i) s *= axis.size();
    return s;
}

QuadratureGrid build_grid(double lo, double hi, std::size_t n, std::size_t dim, QuadratureScheme scheme) {
    if (dim < 1) throw InvalidArgument("grid dimension must be >= 1");
    return QuadratureGrid{dim, make_axis(lo, hi, n, scheme)};
}

void interval_weights(const AxisRule& ax, double c1, double c2, CutCorrection correction, std::span<double> v) {
    const std::size_t n = ax.size();
    if (v.size() != n) throw DimensionMismatch("weight buffer does not match axis size");
    const double a = std::max(c1, ax.lo), b = std::min(c2, ax.hi);
    if (!(b > a)) {
        std::fill(v.begin(), v.end(), 0.0);
        return;
    }
    if (correction == CutCorrection::None) {
        for (std::size_t j = 0; j < n; ++j) v[j] = ax.nodes[j] > a && ax.nodes[j] < b ? ax.weights[j] : 0.0;
        return;
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double lo = std::max(ax.edges[j], a), hi = std::min(ax.edges[j + 1], b);
        v[j] = hi > lo ? ax.weights[j] * std::min(1.0, (hi - lo) / (ax.edges[j + 1] - ax.edges[j])) : 0.0;
    }
    if (correction == CutCorrection::CellFraction) return;

    const bool cut_lo = a > ax.lo, cut_hi = b < ax.hi;
    if (!cut_lo && !cut_hi) return;
    auto window = [&](double c) {
        const std::size_t k = ax.cell_of(c);
        return std::make_pair(k >= kHalfWindow ? k - kHalfWindow : 0, std::min(n - 1, k + kHalfWindow));
    };
    if (cut_lo && cut_hi) {
        const auto w1 = window(a), w2 = window(b);
        if (w1.second + 2 >= w2.first) {
            const double scale = std::max(b - a, ax.weights[ax.cell_of(a)]);
            match_moments(ax, a, b, Group{w1.first, w2.second, 0.5 * (a + b), scale}, v);
            return;
        }
        match_moments(ax, a, b, Group{w1.first, w1.second, a, ax.weights[ax.cell_of(a)]}, v);
        match_moments(ax, a, b, Group{w2.first, w2.second, b, ax.weights[ax.cell_of(b)]}, v);
        return;
    }
    const double c = cut_lo ? a : b;
    const auto w = window(c);
    match_moments(ax, a, b, Group{w.first, w.second, c, ax.weights[ax.cell_of(c)]}, v);
}

std::vector<double> interval_weights(const AxisRule& axis, double c1, double c2, CutCorrection correction) {
    std::vector<double> v(axis.size());
    interval_weights(axis, c1, c2, correction, v);
    return v;
}

} // namespace persistx
