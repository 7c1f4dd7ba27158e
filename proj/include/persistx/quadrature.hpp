#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace persistx {

enum class QuadratureScheme { GaussLegendre, Midpoint };
std::string to_string(QuadratureScheme s);
QuadratureScheme parse_scheme(const std::string& tag);  // "gauss-legendre" | "gl" | "midpoint"

/// One-dimensional rule on [lo, hi].  Node j owns the cell [edges[j], edges[j+1]]
/// of length weights[j]; for Gauss-Legendre the cells separate the nodes.
struct AxisRule {
    double lo = 0.0;
    double hi = 0.0;
    QuadratureScheme scheme = QuadratureScheme::GaussLegendre;
    std::vector<double> nodes;
    std::vector<double> weights;
    std::vector<double> edges;  // size N + 1, edges.front() == lo, edges.back() == hi

    std::size_t size() const noexcept { return nodes.size(); }
    /// Index k of the cell with edges[k] <= c < edges[k+1], clamped to [0, N-1].
    std::size_t cell_of(double c) const noexcept;
};

AxisRule make_axis(double lo, double hi, std::size_t n, QuadratureScheme scheme);

/// Tensor product of one axis rule over `dim` coordinates; states are indexed
/// with the first coordinate most significant.
struct QuadratureGrid {
    std::size_t dim = 1;
    AxisRule axis;

    std::size_t nodes_per_axis() const noexcept { return axis.size(); }
    std::size_t state_count() const noexcept;
};

QuadratureGrid build_grid(double lo, double hi, std::size_t n, std::size_t dim, QuadratureScheme scheme);

/// How a rule treats the integration interval [c1, c2] when its ends fall
/// strictly inside the axis.
///   None           node weight if the node lies inside, else 0
///   CellFraction   node weight times the fraction of its cell inside
///   MomentMatched  cell fractions, then the weights in a few cells around each
///                  cut are re-solved (nonnegatively) so that polynomials up to
///                  degree 2 are integrated exactly over [c1, c2]
enum class CutCorrection { None, CellFraction, MomentMatched };
std::string to_string(CutCorrection c);
CutCorrection parse_correction(const std::string& tag);  // "none" | "fraction" | "moment"

/// Nonnegative weights v with sum_j v_j f(y_j) ~ integral of f over [c1, c2] clipped to the axis.
void interval_weights(const AxisRule& axis, double c1, double c2, CutCorrection correction, std::span<double> out);
std::vector<double> interval_weights(const AxisRule& axis, double c1, double c2, CutCorrection correction);

} // namespace persistx
