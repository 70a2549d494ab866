#pragma once

// Probability current through the arrival point x = 0 and its time integral.

#include "arrival/common.hpp"
#include "arrival/wavepacket.hpp"

#include <string_view>
#include <vector>

namespace arrival {

enum class Quantity { current, flux, detection, bohm_density, kijowski_density, running_sup };

std::string_view to_string(Quantity q);

struct TimeSeries {
  TimeGrid grid;
  Eigen::ArrayXd values;
  Quantity quantity = Quantity::current;

  Eigen::Index size() const { return values.size(); }
  double operator[](Eigen::Index i) const { return values[i]; }
  double front() const { return values[0]; }
  double back() const { return values[values.size() - 1]; }
  /// Piecewise-cubic interpolation between samples.
  double at(double t) const;
};

struct Interval {
  double a;
  double b;
  double length() const { return b - a; }
  bool contains(double t) const { return t > a && t < b; }
};

/// Sorted, pairwise-disjoint open intervals.
using IntervalList = std::vector<Interval>;

bool contains(const IntervalList& intervals, double t);
/// Throws invalid input unless sorted, disjoint and each a < b.
void validate(const IntervalList& intervals);

/// J₀(φ_t) in the factorized form (ħ / 2πm) Re[conj(∫φ_t dk) · ∫k φ_t dk].
double current_at_origin(const MomentumWavefunction& phi, double t);

/// J₀(φ_t) from the full double integral (ħ/2m)(1/2π)∬(k+l) conj(φ_t(l)) φ_t(k) dk dl.
/// Quadratic cost; refuses grids larger than 256 nodes.
double current_at_origin_direct(const MomentumWavefunction& phi, double t);

TimeSeries current_series(const MomentumWavefunction& phi, const TimeGrid& grid);

/// Largest |J| allowed at either grid end for the series to count as covering the transit.
inline constexpr double kEndpointDecay = 1e-10;

/// f(t) = ∫_{t_min}^t J ds with f(t_min) = 0. Throws a coverage error when
/// |J| exceeds `endpoint_decay` at either end of the grid.
TimeSeries cumulative_flux(const TimeSeries& current, double endpoint_decay = kEndpointDecay);

/// ∫₀^∞ |Φ_t(x)|² dx on x_grid. Throws a coverage error if the density at
/// either end of x_grid exceeds `leak` times its peak.
double flux_via_position(const MomentumWavefunction& phi, double t, const XGrid& x_grid,
                         double leak = 1e-12);

/// Maximal intervals where J < -threshold, endpoints by linear interpolation.
IntervalList backflow_intervals(const TimeSeries& current, double threshold = 1e-10);

}  // namespace arrival
