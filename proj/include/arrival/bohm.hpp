#pragma once

// Bohmian detection probability and arrival-time density at x = 0.
//
// P(t) is the sum of the running suprema of f and -f, where f is the
// cumulative flux. The density keeps the current J only while the relevant
// branch of f sits at its running supremum: for a right mover, J is dropped
// on Δ_< = {t : f(t) < sup_{s<=t} f(s)}, the set of times in which the flux
// has been pushed back by backflow and is recovering. Re-entering mass is
// therefore never counted twice.

#include "arrival/current.hpp"
#include "arrival/kijowski.hpp"

namespace arrival {

struct DetectionCurve {
  TimeSeries P;          ///< detection probability
  TimeSeries sup_plus;   ///< running sup of f (>= 0)
  TimeSeries sup_minus;  ///< running sup of -f (>= 0)
};

DetectionCurve detection_probability(const TimeSeries& flux);

/// Tolerance used when none is given: 1e-9 · max|f|.
double default_cutoff_tolerance(const TimeSeries& flux);

/// Δ_< of a flux series.
///
/// Runs of samples with sup_{s<=t} f - f(t) > tol are detected first; each
/// run is then widened to the continuum set: `a` is the maximiser of the
/// continuous f just before the dip and `b` the first later time where it
/// regains f(a). If f never regains its supremum the interval ends at t_max.
///
/// With only the flux given, f between nodes is its cubic interpolant. Given
/// the current as well, f is the exact primitive of the interpolated J, so the
/// integral of J over every returned interval vanishes to rounding.
IntervalList delta_less(const TimeSeries& flux, double tol);
IntervalList delta_less(const TimeSeries& flux, const TimeSeries& current, double tol);

struct BohmDensityCurve {
  TimeSeries B;                 ///< sampled density, already divided by p_infinity
  TimeSeries current;           ///< J on the same grid
  IntervalList delta_less;      ///< cut set of the +f branch
  IntervalList delta_less_neg;  ///< cut set of the -f branch
  double p_infinity = 0.0;      ///< sup f plus sup(-f), from the continuous model
  bool weak_arrival = false;    ///< p_infinity < 0.5

  /// B at an arbitrary time, given the current there.
  double at(double t, double current_at_t) const;
};

/// B(t) = (lim P)⁻¹ [J χ₊(t) − J χ₋(t)], χ± = 1 off the cut set of the ±f branch.
BohmDensityCurve arrival_density(const TimeSeries& current, const TimeSeries& flux, double tol);

/// ∫ w(t) B(t) dt with the cut sets handled exactly (B jumps at the end of each cut interval).
double integrate_density(const BohmDensityCurve& curve, int power);

MomentReport moments(const BohmDensityCurve& curve, double norm_tolerance = 1e-6);

struct GapReport {
  double t_mean_K = 0.0;  ///< ∫ t J dt
  double t_mean_B = 0.0;  ///< first moment of B, signed by the flux orientation
  double gap = 0.0;       ///< t_mean_K - t_mean_B
  double gap_by_F_integral = 0.0;
  bool has_backflow = false;
  int orientation = 1;  ///< +1 if the packet passes left to right, -1 otherwise
  double p_infinity = 0.0;
  double min_current = 0.0;
  double bohm_variance = 0.0;
  IntervalList delta_less;
  IntervalList backflow;
};

struct GapTolerances {
  double cutoff_relative = 1e-9;  ///< χ tolerance relative to max|f|
  double gap = 1e-9;              ///< |gap| above this counts as backflow
  double backflow_threshold = 1e-10;
};

/// First moments of the current and of the Bohmian density, their gap, and
/// the gap recomputed as -Σ ∫_a^b (f(t) - f(a)) dt over Δ_<.
///
/// For a left mover every first moment is taken against the signed flux
/// (the density of J itself, which integrates to -1), so the ordering of
/// t_mean_K and t_mean_B flips while |gap| is unchanged.
GapReport gap_report(const MomentumWavefunction& phi, const TimeGrid& grid,
                     const GapTolerances& tol = {});

}  // namespace arrival
