#pragma once

// Quadrature and interpolation on uniformly sampled data.
//
// Everything here is built on one piecewise-cubic model of the samples:
// on the cell [x_i, x_{i+1}] the data are represented by the Lagrange cubic
// through the four nearest nodes (stencil shifted inward at the ends). Whole
// cell integrals of that model give the weights (-1, 13, 13, -1) / 24, so in
// the interior the composite rule coincides with the trapezoid rule while the
// end cells and any cut cells stay fourth-order accurate.

#include "arrival/common.hpp"

#include <algorithm>
#include <array>
#include <utility>

namespace arrival::quad {

namespace detail {

/// First node of the 4-point stencil used on cell `cell`.
inline Eigen::Index stencil_start(Eigen::Index cell, Eigen::Index n) {
  return std::clamp<Eigen::Index>(cell - 1, 0, n - 4);
}

inline Eigen::Index cell_of(const UniformGrid& grid, double x) {
  const auto i = static_cast<Eigen::Index>(std::floor((x - grid.min()) / grid.step()));
  return std::clamp<Eigen::Index>(i, 0, grid.size() - 2);
}

/// Cubic through nodes j0..j0+3 evaluated at x.
inline double lagrange4(const Eigen::Ref<const Eigen::ArrayXd>& v, const UniformGrid& grid,
                        Eigen::Index j0, double x) {
  const double u = (x - grid[j0]) / grid.step();
  const double l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
  const double l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
  const double l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
  const double l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
  return l0 * v[j0] + l1 * v[j0 + 1] + l2 * v[j0 + 2] + l3 * v[j0 + 3];
}

}  // namespace detail

/// Piecewise-cubic interpolant of `values` (sampled on `grid`) at x, x clamped to the grid.
inline double interpolate(const Eigen::Ref<const Eigen::ArrayXd>& values, const UniformGrid& grid,
                          double x) {
  x = std::clamp(x, grid.min(), grid.max());
  const auto cell = detail::cell_of(grid, x);
  return detail::lagrange4(values, grid, detail::stencil_start(cell, grid.size()), x);
}

/// Integral over [a, b] of weight(x) times the piecewise-cubic interpolant.
/// Three-point Gauss-Legendre per (partial) cell, exact for polynomial weights
/// up to degree two. Requires grid.min() <= a <= b <= grid.max().
template <class Weight>
double integrate(const Eigen::Ref<const Eigen::ArrayXd>& values, const UniformGrid& grid, double a,
                 double b, Weight&& weight) {
  if (b <= a) return 0.0;
  static constexpr std::array<double, 3> node{-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr std::array<double, 3> wt{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  const auto n = grid.size();
  const auto first = detail::cell_of(grid, a);
  const auto last = detail::cell_of(grid, b);
  double total = 0.0;
  for (auto cell = first; cell <= last; ++cell) {
    const double lo = std::max(a, grid[cell]);
    const double hi = std::min(b, grid[cell + 1]);
    if (hi <= lo) continue;
    const auto j0 = detail::stencil_start(cell, n);
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    double s = 0.0;
    for (std::size_t q = 0; q < 3; ++q) {
      const double x = mid + half * node[q];
      s += wt[q] * weight(x) * detail::lagrange4(values, grid, j0, x);
    }
    total += half * s;
  }
  return total;
}

inline double integrate(const Eigen::Ref<const Eigen::ArrayXd>& values, const UniformGrid& grid,
                        double a, double b) {
  return integrate(values, grid, a, b, [](double) { return 1.0; });
}

/// Integral over the whole grid of x^power times the samples.
inline double moment(const Eigen::Ref<const Eigen::ArrayXd>& values, const UniformGrid& grid,
                     int power) {
  return integrate(values, grid, grid.min(), grid.max(),
                   [power](double x) { return std::pow(x, power); });
}

/// Running integral from grid.min(): result[0] = 0, result[i] = integral up to node i.
Eigen::ArrayXd cumulative(const Eigen::Ref<const Eigen::ArrayXd>& values, const UniformGrid& grid);

/// Exact antiderivative of the piecewise-cubic interpolant, anchored at grid.min().
/// Piecewise quartic; agrees with cumulative() at the nodes.
class Primitive {
 public:
  Primitive(Eigen::ArrayXd values, UniformGrid grid)
      : values_(std::move(values)), grid_(grid), nodes_(cumulative(values_, grid_)) {}

  double operator()(double x) const {
    x = std::clamp(x, grid_.min(), grid_.max());
    const auto cell = detail::cell_of(grid_, x);
    return nodes_[cell] + integrate(values_, grid_, grid_[cell], x);
  }
  const Eigen::ArrayXd& nodes() const { return nodes_; }
  const UniformGrid& grid() const { return grid_; }

 private:
  Eigen::ArrayXd values_;
  UniformGrid grid_;
  Eigen::ArrayXd nodes_;
};

/// Three-point Gauss-Legendre on each grid cell (or part of one) inside [a, b].
template <class Fn>
double integrate_function(Fn&& fn, const UniformGrid& grid, double a, double b) {
  if (b <= a) return 0.0;
  static constexpr std::array<double, 3> node{-0.7745966692414834, 0.0, 0.7745966692414834};
  static constexpr std::array<double, 3> wt{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
  double total = 0.0;
  for (auto cell = detail::cell_of(grid, a); cell <= detail::cell_of(grid, b); ++cell) {
    const double lo = std::max(a, grid[cell]);
    const double hi = std::min(b, grid[cell + 1]);
    if (hi <= lo) continue;
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    for (std::size_t q = 0; q < 3; ++q) total += half * wt[q] * fn(mid + half * node[q]);
  }
  return total;
}

struct GaussRule {
  Eigen::ArrayXd nodes;    ///< on [-1, 1], ascending
  Eigen::ArrayXd weights;
};

/// n-point Gauss-Legendre rule (Golub-Welsch).
GaussRule gauss_legendre(int n);

/// Plain composite trapezoid rule.
inline double trapezoid(const Eigen::Ref<const Eigen::ArrayXd>& values, double step) {
  const auto n = values.size();
  if (n < 2) return 0.0;
  return step * (values.sum() - 0.5 * (values[0] + values[n - 1]));
}

}  // namespace arrival::quad
