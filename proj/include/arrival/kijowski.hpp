#pragma once

// Kijowski's arrival-time density q₀ and the axioms a candidate density must satisfy.

#include "arrival/current.hpp"
#include "arrival/wavepacket.hpp"

#include <functional>
#include <string>

namespace arrival {

/// A real-valued map on states, expected to be q(φ) = S(φ, φ) for a hermitian
/// sesquilinear S. The arrival density at time t is q(φ_t).
struct QuadraticFormModel {
  std::string name;
  std::function<double(const MomentumWavefunction&)> evaluator;

  double operator()(const MomentumWavefunction& phi) const { return evaluator(phi); }
};

/// q₀(φ) = (ħ / 2πm) |∫ √k φ(k) dk|². Domain error if the state is not a right mover.
double q0(const MomentumWavefunction& phi);

QuadraticFormModel q0_form();

/// q₀(φ_t).
double q0_density(const MomentumWavefunction& phi, double t);

/// t ↦ q(φ_t) on the grid.
TimeSeries density_series(const QuadraticFormModel& q, const MomentumWavefunction& phi,
                          const TimeGrid& grid);

struct AxiomResult {
  bool passed = false;
  double value = 0.0;  ///< the statistic that was compared against its limit
  double limit = 0.0;
};

struct AxiomReport {
  std::string form;
  AxiomResult positivity;     ///< min_t q(φ_t), must be >= -limit
  AxiomResult conjugation;    ///< max_t |q(conj φ_t) - q(φ_t)|
  AxiomResult normalization;  ///< |∫ q(φ_t) dt - ‖φ‖²|
  AxiomResult second_moment;  ///< max of t² q(φ_t) at the two grid ends

  bool all_passed() const {
    return positivity.passed && conjugation.passed && normalization.passed && second_moment.passed;
  }
};

struct AxiomTolerances {
  double positivity = 1e-10;
  double conjugation = 1e-12;
  double normalization = 1e-6;
  double tail = 1e-8;
};

/// Numerical check of the four axioms on a time grid covering the transit.
/// Failures are recorded in the report, never thrown.
AxiomReport axiom_check(const QuadraticFormModel& q, const MomentumWavefunction& phi,
                        const TimeGrid& grid, const AxiomTolerances& tol = {});

enum class MomentMethod { from_density, from_current };

struct MomentReport {
  double mean = 0.0;
  double second_moment = 0.0;
  double variance = 0.0;
  MomentMethod method = MomentMethod::from_density;
};

/// ∫ t J(t) dt: the first moment shared by every admissible density.
double mean_from_current(const TimeSeries& current);

/// First and second moments of a density that integrates to one.
/// Throws a normalization error if |∫ρ dt - 1| exceeds norm_tolerance.
MomentReport moments(const TimeSeries& density, double norm_tolerance = 1e-6);

}  // namespace arrival
