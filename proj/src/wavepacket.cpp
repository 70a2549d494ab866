#include "arrival/wavepacket.hpp"

#include "arrival/quadrature.hpp"

#include <numbers>

namespace arrival {

namespace {

constexpr Eigen::Index kReseed = 32;
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

void require_same_grid(const MomentumWavefunction& a, const MomentumWavefunction& b) {
  if (!(a.grid() == b.grid()))
    throw Error(ErrorKind::invalid_input, "states live on different k grids");
}

}  // namespace

MomentumWavefunction::MomentumWavefunction(Units units, KGrid grid, Eigen::VectorXcd amplitudes,
                                           std::string label)
    : units_(units), grid_(grid), amplitudes_(std::move(amplitudes)), label_(std::move(label)) {
  units_.validate();
  if (amplitudes_.size() != grid_.size())
    throw Error(ErrorKind::invalid_input, "amplitude count does not match k grid");
  if (!amplitudes_.allFinite()) throw Error(ErrorKind::invalid_input, "non-finite amplitudes");
}

Eigen::ArrayXd MomentumWavefunction::weights() const {
  Eigen::ArrayXd w = Eigen::ArrayXd::Constant(grid_.size(), grid_.step());
  w[0] *= 0.5;
  w[w.size() - 1] *= 0.5;
  return w;
}

double MomentumWavefunction::norm_squared() const {
  return (weights() * amplitudes_.array().abs2()).sum();
}

double MomentumWavefunction::nonpositive_mass_fraction() const {
  const double total = norm_squared();
  if (total == 0.0) return 0.0;
  const Eigen::ArrayXd k = momenta();
  const Eigen::ArrayXd mass = weights() * amplitudes_.array().abs2();
  return (k <= 0.0).select(mass, 0.0).sum() / total;
}

MomentumWavefunction make_gaussian_superposition(const Units& units, const KGrid& grid,
                                                 std::span<const GaussianComponent> components,
                                                 std::string label) {
  if (components.empty()) throw Error(ErrorKind::invalid_input, "empty component list");
  bool any_weight = false;
  for (const auto& c : components) {
    if (!(c.sigma_k > 0.0)) throw Error(ErrorKind::invalid_input, "sigma_k must be positive");
    any_weight = any_weight || std::abs(c.weight) > 0.0;
  }
  if (!any_weight) throw Error(ErrorKind::degenerate_state, "all component weights are zero");

  const Eigen::ArrayXd k = grid.points();
  Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(grid.size());
  for (const auto& c : components) {
    for (Eigen::Index i = 0; i < k.size(); ++i) {
      const double d = k[i] - c.k0;
      amp[i] += c.weight * std::exp(-d * d / (4.0 * c.sigma_k * c.sigma_k)) *
                std::polar(1.0, -k[i] * c.x0);
    }
  }
  return {units, grid, std::move(amp), std::move(label)};
}

double gaussian_tail_mass(std::span<const GaussianComponent> components, double lo, double hi) {
  double total = 0.0;
  double outside = 0.0;
  for (const auto& c : components) {
    const double w = std::norm(c.weight);
    // |φ|² of one component is a normal density with standard deviation sigma_k
    const double s = c.sigma_k * std::numbers::sqrt2;
    outside += w * 0.5 * (std::erfc((c.k0 - lo) / s) + std::erfc((hi - c.k0) / s));
    total += w;
  }
  return total > 0.0 ? outside / total : 0.0;
}

MomentumWavefunction normalize(const MomentumWavefunction& phi) {
  const double n = phi.norm();
  if (!(n > 0.0)) throw Error(ErrorKind::degenerate_state, "cannot normalize the zero state");
  return phi.with_amplitudes(phi.amplitudes() / n);
}

MomentumWavefunction shift_arrival_point(const MomentumWavefunction& phi, double x) {
  if (x == 0.0) return phi;
  const Eigen::ArrayXd k = phi.momenta();
  Eigen::VectorXcd amp = phi.amplitudes();
  for (Eigen::Index i = 0; i < amp.size(); ++i) amp[i] *= std::polar(1.0, -k[i] * x);
  return phi.with_amplitudes(std::move(amp));
}

MomentumWavefunction evolve(const MomentumWavefunction& phi, double t) {
  if (t == 0.0) return phi;
  const double c = 0.5 * phi.units().hbar_over_mass() * t;
  const Eigen::ArrayXd k = phi.momenta();
  Eigen::VectorXcd amp = phi.amplitudes();
  for (Eigen::Index i = 0; i < amp.size(); ++i) amp[i] *= std::polar(1.0, -c * k[i] * k[i]);
  return phi.with_amplitudes(std::move(amp));
}

MomentumWavefunction conjugate(const MomentumWavefunction& phi) {
  return phi.with_amplitudes(phi.amplitudes().conjugate());
}

MomentumWavefunction parity(const MomentumWavefunction& phi) {
  const KGrid& g = phi.grid();
  KGrid mirrored(-g.max(), -g.min(), g.size());
  Eigen::VectorXcd amp = phi.amplitudes().reverse();
  return {phi.units(), mirrored, std::move(amp), phi.label().empty() ? "" : phi.label() + " (mirror)"};
}

complex inner(const MomentumWavefunction& phi, const MomentumWavefunction& psi) {
  require_same_grid(phi, psi);
  const Eigen::ArrayXcd prod = phi.amplitudes().conjugate().array() * psi.amplitudes().array();
  return (prod * phi.weights().cast<complex>()).sum();
}

MomentumWavefunction superpose(complex a, const MomentumWavefunction& phi, complex b,
                               const MomentumWavefunction& psi, std::string label) {
  require_same_grid(phi, psi);
  return {phi.units(), phi.grid(), a * phi.amplitudes() + b * psi.amplitudes(), std::move(label)};
}

double PositionField::norm_squared() const {
  const Eigen::ArrayXd rho = density();
  return quad::trapezoid(rho, grid.step());
}

PositionField to_position(const MomentumWavefunction& phi_t, const XGrid& x_grid, double t) {
  const KGrid& kg = phi_t.grid();
  const double kmax = std::max(std::abs(kg.min()), std::abs(kg.max()));
  if (!(x_grid.step() * kmax < std::numbers::pi))
    throw Error(ErrorKind::resolution, "x grid undersamples the fastest oscillation (need dx*k_max < pi)");

  const Eigen::ArrayXd k = phi_t.momenta();
  const Eigen::ArrayXcd c = (phi_t.weights() * kInvSqrt2Pi).cast<complex>() * phi_t.amplitudes().array();
  const double x0 = x_grid.min();
  const double dx = x_grid.step();
  const Eigen::Index nx = x_grid.size();

  Eigen::VectorXcd values = Eigen::VectorXcd::Zero(nx);
  for (Eigen::Index m = 0; m < k.size(); ++m) {
    if (c[m] == complex{}) continue;
    const complex step = std::polar(1.0, k[m] * dx);
    complex z;
    for (Eigen::Index j = 0; j < nx; ++j) {
      if (j % kReseed == 0) z = std::polar(1.0, k[m] * (x0 + dx * static_cast<double>(j)));
      values[j] += c[m] * z;
      z *= step;
    }
  }
  return {x_grid, std::move(values), t};
}

PointEvaluator::PointEvaluator(const MomentumWavefunction& phi)
    : k_min_(phi.grid().min()),
      dk_(phi.grid().step()),
      hbar_over_mass_(phi.units().hbar_over_mass()),
      weighted_((phi.weights() * kInvSqrt2Pi).cast<complex>() * phi.amplitudes().array()) {}

PointEvaluator::Value PointEvaluator::operator()(double x, double t) const {
  // phase(m) = k_m x - c k_m², c = ħt/2m; successive differences shift by -2cΔk²
  const double c = 0.5 * hbar_over_mass_ * t;
  const complex s = std::polar(1.0, -2.0 * c * dk_ * dk_);
  complex psi{};
  complex dpsi{};
  complex z;
  complex r;
  const Eigen::Index n = weighted_.size();
  for (Eigen::Index m = 0; m < n; ++m) {
    const double k = k_min_ + dk_ * static_cast<double>(m);
    if (m % kReseed == 0) {
      z = std::polar(1.0, k * x - c * k * k);
      r = std::polar(1.0, dk_ * x - c * (2.0 * k * dk_ + dk_ * dk_));
    }
    const complex term = weighted_[m] * z;
    psi += term;
    dpsi += complex(0.0, k) * term;
    z *= r;
    r *= s;
  }
  return {psi, dpsi};
}

}  // namespace arrival
