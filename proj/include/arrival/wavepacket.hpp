#pragma once

// Momentum-space wave packets of a free particle on the line.
//
// A state is a vector of complex amplitudes phi(k_i) on a uniform k grid.
// Integrals over k use the trapezoid rule; the amplitudes of every packet we
// build are negligible at the grid ends, so this is spectrally accurate.

#include "arrival/common.hpp"

#include <Eigen/Core>

#include <complex>
#include <span>
#include <string>
#include <utility>

namespace arrival {

using complex = std::complex<double>;

struct GaussianComponent {
  complex weight{1.0, 0.0};
  double k0 = 0.0;       ///< mean momentum
  double sigma_k = 1.0;  ///< momentum width; position width at t = 0 is 1 / (2 sigma_k)
  double x0 = 0.0;       ///< position-space center at t = 0
};

class MomentumWavefunction {
 public:
  MomentumWavefunction() = default;
  MomentumWavefunction(Units units, KGrid grid, Eigen::VectorXcd amplitudes, std::string label = {});

  const Units& units() const { return units_; }
  const KGrid& grid() const { return grid_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  const std::string& label() const { return label_; }
  Eigen::ArrayXd momenta() const { return grid_.points(); }

  /// Trapezoid weights Δk·(1/2, 1, ..., 1, 1/2).
  Eigen::ArrayXd weights() const;
  double norm_squared() const;
  double norm() const { return std::sqrt(norm_squared()); }
  /// Fraction of ‖φ‖² carried by nodes with k <= 0.
  double nonpositive_mass_fraction() const;
  bool is_right_mover(double tail_tolerance = 1e-12) const {
    return nonpositive_mass_fraction() < tail_tolerance;
  }

  MomentumWavefunction with_amplitudes(Eigen::VectorXcd amplitudes) const {
    return {units_, grid_, std::move(amplitudes), label_};
  }
  MomentumWavefunction relabeled(std::string label) const {
    return {units_, grid_, amplitudes_, std::move(label)};
  }

 private:
  Units units_{};
  KGrid grid_{};
  Eigen::VectorXcd amplitudes_{};
  std::string label_{};
};

/// Σ_j w_j exp(-(k - k0_j)² / (4 σ_j²)) exp(-i k x0_j) sampled on `grid`, not normalized.
MomentumWavefunction make_gaussian_superposition(const Units& units, const KGrid& grid,
                                                 std::span<const GaussianComponent> components,
                                                 std::string label = {});

/// Share of the continuous superposition's |φ|² lying outside [lo, hi],
/// estimated component by component (cross terms are dropped) and weighted by |w|².
double gaussian_tail_mass(std::span<const GaussianComponent> components, double lo, double hi);

MomentumWavefunction normalize(const MomentumWavefunction& phi);

/// Moves the arrival point to x: φ(k) -> e^{-ikx} φ(k).
MomentumWavefunction shift_arrival_point(const MomentumWavefunction& phi, double x);

/// Free evolution φ_t(k) = exp(-i ħ k² t / 2m) φ(k).
MomentumWavefunction evolve(const MomentumWavefunction& phi, double t);

/// Complex conjugate amplitudes, φ̄(k).
MomentumWavefunction conjugate(const MomentumWavefunction& phi);

/// Parity image φ(-k) on the mirrored grid [-k_max, -k_min].
MomentumWavefunction parity(const MomentumWavefunction& phi);

/// ⟨φ, ψ⟩ = ∫ conj(φ) ψ dk. Both states must share a grid.
complex inner(const MomentumWavefunction& phi, const MomentumWavefunction& psi);

/// a·φ + b·ψ on the common grid.
MomentumWavefunction superpose(complex a, const MomentumWavefunction& phi, complex b,
                               const MomentumWavefunction& psi, std::string label = {});

struct PositionField {
  XGrid grid;
  Eigen::VectorXcd values;
  double t = 0.0;

  Eigen::ArrayXd density() const { return values.array().abs2(); }
  double norm_squared() const;
};

/// Φ_t(x) = (1/√2π) ∫ e^{ikx} φ_t(k) dk on every node of x_grid.
/// Throws a resolution error unless Δx·max|k| < π.
PositionField to_position(const MomentumWavefunction& phi_t, const XGrid& x_grid, double t = 0.0);

/// Pointwise evaluator of Φ_t(x) and ∂ₓΦ_t(x) for an arbitrary (x, t).
///
/// The phase k x - ħk²t/2m is quadratic in the node index, so the
/// exponentials follow from a two-term multiplicative recurrence that is
/// re-seeded exactly every few dozen nodes.
class PointEvaluator {
 public:
  explicit PointEvaluator(const MomentumWavefunction& phi);

  struct Value {
    complex psi;
    complex dpsi;
  };
  Value operator()(double x, double t) const;

 private:
  double k_min_;
  double dk_;
  double hbar_over_mass_;
  Eigen::VectorXcd weighted_;  // trapezoid weight × φ(k) / √2π
};

}  // namespace arrival
