#include "arrival/current.hpp"

#include "arrival/quadrature.hpp"

#include <numbers>
#include <sstream>

namespace arrival {

std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::current: return "current";
    case Quantity::flux: return "flux";
    case Quantity::detection: return "detection";
    case Quantity::bohm_density: return "bohm_density";
    case Quantity::kijowski_density: return "kijowski_density";
    case Quantity::running_sup: return "running_sup";
  }
  return "unknown";
}

double TimeSeries::at(double t) const { return quad::interpolate(values, grid, t); }

bool contains(const IntervalList& intervals, double t) {
  for (const auto& iv : intervals)
    if (iv.contains(t)) return true;
  return false;
}

void validate(const IntervalList& intervals) {
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    if (!(intervals[i].a < intervals[i].b))
      throw Error(ErrorKind::invalid_input, "interval with a >= b");
    if (i > 0 && intervals[i].a < intervals[i - 1].b)
      throw Error(ErrorKind::invalid_input, "intervals overlap or are unsorted");
  }
}

double current_at_origin(const MomentumWavefunction& phi, double t) {
  const MomentumWavefunction phi_t = evolve(phi, t);
  const Eigen::ArrayXcd w = phi.weights().cast<complex>() * phi_t.amplitudes().array();
  const complex a = w.sum();
  const complex b = (phi.momenta().cast<complex>() * w).sum();
  return phi.units().hbar_over_mass() / (2.0 * std::numbers::pi) * (std::conj(a) * b).real();
}

double current_at_origin_direct(const MomentumWavefunction& phi, double t) {
  const auto n = phi.grid().size();
  if (n > 256) throw Error(ErrorKind::invalid_input, "direct double integral limited to n_k <= 256");
  const MomentumWavefunction phi_t = evolve(phi, t);
  const Eigen::ArrayXd k = phi.momenta();
  const Eigen::ArrayXd w = phi.weights();
  const Eigen::VectorXcd& amp = phi_t.amplitudes();
  complex sum{};
  for (Eigen::Index i = 0; i < n; ++i)      // k
    for (Eigen::Index j = 0; j < n; ++j)    // l
      sum += w[i] * w[j] * (k[i] + k[j]) * std::conj(amp[j]) * amp[i];
  return phi.units().hbar_over_mass() / 2.0 * sum.real() / (2.0 * std::numbers::pi);
}

TimeSeries current_series(const MomentumWavefunction& phi, const TimeGrid& grid) {
  Eigen::ArrayXd values(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) values[i] = current_at_origin(phi, grid[i]);
  return {grid, std::move(values), Quantity::current};
}

TimeSeries cumulative_flux(const TimeSeries& current, double endpoint_decay) {
  const double lo = std::abs(current.front());
  const double hi = std::abs(current.back());
  if (lo > endpoint_decay || hi > endpoint_decay) {
    std::ostringstream msg;
    msg.precision(3);
    msg << "current has not decayed at the time grid ends (|J(t_min)| = " << lo
        << ", |J(t_max)| = " << hi << ", limit " << endpoint_decay
        << "); widen [t_min, t_max] to cover the transit";
    throw Error(ErrorKind::coverage, msg.str());
  }
  return {current.grid, quad::cumulative(current.values, current.grid), Quantity::flux};
}

double flux_via_position(const MomentumWavefunction& phi, double t, const XGrid& x_grid, double leak) {
  if (!x_grid.contains(0.0)) throw Error(ErrorKind::coverage, "x grid does not contain the arrival point");
  const PositionField field = to_position(evolve(phi, t), x_grid, t);
  const Eigen::ArrayXd rho = field.density();
  const double peak = rho.maxCoeff();
  if (rho[0] > leak * peak || rho[rho.size() - 1] > leak * peak)
    throw Error(ErrorKind::coverage, "position density leaks beyond the x grid");
  return quad::integrate(rho, x_grid, 0.0, x_grid.max());
}

IntervalList backflow_intervals(const TimeSeries& current, double threshold) {
  if (threshold < 0.0) throw Error(ErrorKind::invalid_input, "threshold must be non-negative");
  const auto& g = current.grid;
  const auto& v = current.values;
  const auto n = v.size();
  // root of J + threshold between nodes i and i+1
  auto crossing = [&](Eigen::Index i) {
    const double y0 = v[i] + threshold;
    const double y1 = v[i + 1] + threshold;
    return g[i] + g.step() * y0 / (y0 - y1);
  };
  IntervalList out;
  Eigen::Index i = 0;
  while (i < n) {
    if (!(v[i] < -threshold)) {
      ++i;
      continue;
    }
    const double a = i == 0 ? g.min() : crossing(i - 1);
    Eigen::Index j = i;
    while (j + 1 < n && v[j + 1] < -threshold) ++j;
    const double b = j + 1 == n ? g.max() : crossing(j);
    if (b > a) out.push_back({a, b});
    i = j + 1;
  }
  return out;
}

}  // namespace arrival
