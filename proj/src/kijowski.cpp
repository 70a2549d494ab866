#include "arrival/kijowski.hpp"

#include "arrival/quadrature.hpp"

#include <algorithm>
#include <numbers>

namespace arrival {

double q0(const MomentumWavefunction& phi) {
  if (!phi.is_right_mover())
    throw Error(ErrorKind::domain, "q0 needs a state supported on k > 0 (state '" + phi.label() + "')");
  const Eigen::ArrayXd root_k = phi.momenta().max(0.0).sqrt();
  const complex s = ((phi.weights() * root_k).cast<complex>() * phi.amplitudes().array()).sum();
  return phi.units().hbar_over_mass() / (2.0 * std::numbers::pi) * std::norm(s);
}

QuadraticFormModel q0_form() { return {"q0", [](const MomentumWavefunction& phi) { return q0(phi); }}; }

double q0_density(const MomentumWavefunction& phi, double t) { return q0(evolve(phi, t)); }

TimeSeries density_series(const QuadraticFormModel& q, const MomentumWavefunction& phi,
                          const TimeGrid& grid) {
  Eigen::ArrayXd values(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) values[i] = q(evolve(phi, grid[i]));
  return {grid, std::move(values), Quantity::kijowski_density};
}

AxiomReport axiom_check(const QuadraticFormModel& q, const MomentumWavefunction& phi,
                        const TimeGrid& grid, const AxiomTolerances& tol) {
  AxiomReport report;
  report.form = q.name;
  const TimeSeries d = density_series(q, phi, grid);

  report.positivity.value = d.values.minCoeff();
  report.positivity.limit = tol.positivity;
  report.positivity.passed = report.positivity.value >= -tol.positivity;

  double worst = 0.0;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const MomentumWavefunction phi_t = evolve(phi, grid[i]);
    worst = std::max(worst, std::abs(q(conjugate(phi_t)) - d[i]));
  }
  report.conjugation.value = worst;
  report.conjugation.limit = tol.conjugation;
  report.conjugation.passed = worst <= tol.conjugation;

  const double total = quad::integrate(d.values, grid, grid.min(), grid.max());
  report.normalization.value = std::abs(total - phi.norm_squared());
  report.normalization.limit = tol.normalization;
  report.normalization.passed = report.normalization.value <= tol.normalization;

  const double t0 = grid.min();
  const double t1 = grid.max();
  report.second_moment.value = std::max(std::abs(t0 * t0 * d.front()), std::abs(t1 * t1 * d.back()));
  report.second_moment.limit = tol.tail;
  report.second_moment.passed = report.second_moment.value < tol.tail;
  return report;
}

double mean_from_current(const TimeSeries& current) {
  return quad::moment(current.values, current.grid, 1);
}

MomentReport moments(const TimeSeries& density, double norm_tolerance) {
  const double total = quad::moment(density.values, density.grid, 0);
  if (!(std::abs(total - 1.0) <= norm_tolerance))
    throw Error(ErrorKind::normalization,
                "density integrates to " + std::to_string(total) + ", expected 1");
  MomentReport r;
  r.mean = quad::moment(density.values, density.grid, 1);
  r.second_moment = quad::moment(density.values, density.grid, 2);
  r.variance = r.second_moment - r.mean * r.mean;
  r.method = density.quantity == Quantity::current ? MomentMethod::from_current
                                                   : MomentMethod::from_density;
  return r;
}

}  // namespace arrival
