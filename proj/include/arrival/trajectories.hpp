#pragma once

// Bohmian trajectories of a free packet, used as an independent Monte Carlo
// estimate of the detection probability P(t).

#include "arrival/current.hpp"
#include "arrival/wavepacket.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace arrival {

/// Guidance field v = (ħ/m) Im[conj(Φ) ∂ₓΦ] / |Φ|², evaluated pointwise from the k integral.
class VelocityField {
 public:
  /// `epsilon` is an absolute density floor; below it the field is undefined.
  VelocityField(const MomentumWavefunction& phi, double epsilon);

  struct Sample {
    double velocity;
    double density;
  };
  /// No check against epsilon.
  Sample sample(double x, double t) const;
  /// Throws a node-proximity error when |Φ_t(x)|² <= epsilon.
  double operator()(double x, double t) const;
  double epsilon() const { return epsilon_; }

 private:
  PointEvaluator eval_;
  double hbar_over_mass_;
  double epsilon_;
};

/// Velocity at (x, t); node-proximity error when |Φ_t(x)|² <= epsilon.
double velocity(const MomentumWavefunction& phi, double x, double t, double epsilon = 0.0);

/// Φ_t and ∂ₓΦ_t tabulated over one spatial period 2π/Δk by a single FFT and
/// interpolated with 8-point Lagrange stencils. The carrier e^{i k_c x},
/// k_c the grid center, is divided out before interpolation.
class FieldSnapshot {
 public:
  FieldSnapshot(const MomentumWavefunction& phi, double t);

  VelocityField::Sample sample(double x) const;
  /// Positions farther than this from the origin alias onto periodic images.
  double half_period() const { return 0.5 * period_; }

 private:
  double hbar_over_mass_;
  double k_center_;
  double x_start_;
  double dx_;
  double period_;
  Eigen::VectorXcd envelope_;  // e^{-i k_c x} Φ
  Eigen::VectorXcd slope_;     // e^{-i k_c x} ∂ₓΦ
};

/// |Φ_t|² peak over x_grid.
double peak_density(const MomentumWavefunction& phi, double t, const XGrid& x_grid);

/// Inverse-CDF draws from |Φ_{t0}|² tabulated on x_grid (trapezoid CDF,
/// linear between nodes). The i-th draw depends only on (seed, i).
std::vector<double> sample_initial_positions(const MomentumWavefunction& phi, double t0,
                                             std::size_t n, std::uint64_t seed, const XGrid& x_grid);

struct TabulatedCdf {
  XGrid grid;
  Eigen::ArrayXd cdf;  ///< normalized to end at 1
  double operator()(double x) const;
};

TabulatedCdf position_cdf(const MomentumWavefunction& phi, double t0, const XGrid& x_grid);

/// Kolmogorov-Smirnov distance between the empirical CDF of `samples` and `cdf`.
double ks_statistic(std::span<const double> samples, const TabulatedCdf& cdf);

/// Asymptotic one-sample KS critical value at the 1% level.
inline double ks_critical_1pct(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

struct StepControl {
  double rtol = 1e-8;
  double atol = 1e-8;
  double h_min = 1e-10;
  /// Step cap in units of the time-grid spacing; keeps a forward-and-back
  /// crossing from hiding inside one step.
  double max_step_cells = 4.0;
  /// Node floor relative to the peak density at t0.
  double epsilon_relative = 1e-12;
  /// Fraction of forced node-limited steps above which the run is rejected.
  double max_node_failure_fraction = 1e-3;
};

struct TrajectoryEnsemble {
  std::uint64_t seed = 0;
  double t0 = 0.0;
  std::vector<double> initial_positions;              ///< sorted ascending
  std::vector<double> final_positions;                ///< same order
  std::vector<std::optional<double>> crossing_times;  ///< first crossing of x = 0
  TimeSeries P_hat;
  TimeSeries standard_error;
  std::size_t order_violations = 0;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  std::size_t node_failures = 0;  ///< accepted steps forced through the density floor
};

/// Integrates N trajectories from grid.min() to grid.max() with quantum-equilibrium
/// initial positions and records each first crossing of x = 0. Trajectories that
/// start at x >= 0 count as crossed at t0.
TrajectoryEnsemble monte_carlo_detection(const MomentumWavefunction& phi, const TimeGrid& grid,
                                         std::size_t n, std::uint64_t seed, const XGrid& x_grid,
                                         const StepControl& control = {});

}  // namespace arrival
