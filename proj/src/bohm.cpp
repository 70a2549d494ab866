#include "arrival/bohm.hpp"

#include "arrival/quadrature.hpp"

#include <algorithm>
#include <functional>

namespace arrival {

namespace {

Eigen::ArrayXd running_max(const Eigen::ArrayXd& v) {
  Eigen::ArrayXd out(v.size());
  double m = v[0];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    m = std::max(m, v[i]);
    out[i] = m;
  }
  return out;
}

// Maximiser of the interpolated series on [lo, hi].
using Model = std::function<double(double)>;

double golden_max(const Model& s, double lo, double hi) {
  constexpr double r = 0.6180339887498949;
  double x1 = hi - r * (hi - lo);
  double x2 = lo + r * (hi - lo);
  double f1 = s(x1);
  double f2 = s(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = s(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = s(x1);
    }
  }
  // the endpoints may beat the interior (monotone stretch)
  double best = 0.5 * (lo + hi);
  for (double c : {lo, hi})
    if (s(c) > s(best)) best = c;
  return best;
}

// Root of s(t) - level on [lo, hi] with s(lo) < level <= s(hi).
double bisect_level(const Model& s, double level, double lo, double hi) {
  for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (s(mid) < level ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

TimeSeries negated(const TimeSeries& s) { return {s.grid, -s.values, s.quantity}; }

// Open interval, except that one reaching t_max also covers t_max.
bool inside(const IntervalList& list, double t, double t_max) {
  for (const auto& iv : list)
    if (t > iv.a && (t < iv.b || iv.b >= t_max)) return true;
  return false;
}

// ∫ t^p J over the complement of `cut` within the grid.
double integrate_off(const TimeSeries& current, const IntervalList& cut, int power) {
  const auto& g = current.grid;
  auto w = [power](double t) { return std::pow(t, power); };
  double total = 0.0;
  double from = g.min();
  for (const auto& iv : cut) {
    total += quad::integrate(current.values, g, from, iv.a, w);
    from = iv.b;
  }
  total += quad::integrate(current.values, g, from, g.max(), w);
  return total;
}

}  // namespace

DetectionCurve detection_probability(const TimeSeries& flux) {
  const Eigen::ArrayXd plus = running_max(flux.values).max(0.0);
  const Eigen::ArrayXd minus = running_max(-flux.values).max(0.0);
  return {{flux.grid, plus + minus, Quantity::detection},
          {flux.grid, plus, Quantity::running_sup},
          {flux.grid, minus, Quantity::running_sup}};
}

double default_cutoff_tolerance(const TimeSeries& flux) {
  return 1e-9 * std::max(flux.values.abs().maxCoeff(), 1e-300);
}

namespace {

IntervalList refined_cut_set(const TimeSeries& flux, const Model& model, double tol) {
  const auto& g = flux.grid;
  const auto& f = flux.values;
  const auto n = f.size();
  const Eigen::ArrayXd sup = running_max(f);

  IntervalList out;
  Eigen::Index i = 0;
  while (i < n) {
    if (!(sup[i] - f[i] > tol)) {
      ++i;
      continue;
    }
    Eigen::Index j = i;
    while (j + 1 < n && sup[j + 1] - f[j + 1] > tol) ++j;

    // last sample attaining the supremum in force during the run
    Eigen::Index p = i;
    while (p > 0 && f[p] != sup[i]) --p;
    const double a = golden_max(model, g[std::max<Eigen::Index>(p - 1, 0)],
                                g[std::min<Eigen::Index>(p + 1, n - 1)]);
    const double level = std::max(model(a), sup[i]);

    double b = g.max();
    for (Eigen::Index c = j; c + 1 < n; ++c) {
      if (f[c + 1] >= level) {
        b = f[c] >= level ? g[c] : bisect_level(model, level, g[c], g[c + 1]);
        break;
      }
    }
    if (!out.empty() && a <= out.back().b) {
      out.back().b = std::max(out.back().b, b);
    } else if (b > a) {
      out.push_back({a, b});
    }
    // skip every run already swallowed by [a, b]
    i = j + 1;
    while (i < n && g[i] < b) ++i;
  }
  return out;
}

}  // namespace

IntervalList delta_less(const TimeSeries& flux, double tol) {
  return refined_cut_set(flux, [&flux](double t) { return flux.at(t); }, tol);
}

IntervalList delta_less(const TimeSeries& flux, const TimeSeries& current, double tol) {
  if (!(current.grid == flux.grid))
    throw Error(ErrorKind::invalid_input, "current and flux must share a time grid");
  const quad::Primitive F(current.values, current.grid);
  const double shift = flux.front();
  return refined_cut_set(flux, [&F, shift](double t) { return shift + F(t); }, tol);
}

double BohmDensityCurve::at(double t, double current_at_t) const {
  const double t_max = current.grid.max();
  // f falls at t when J < 0, so t is below the running sup of f however
  // narrow the dip; likewise for -f when J > 0
  const double plus = current_at_t < 0.0 || inside(delta_less, t, t_max) ? 0.0 : current_at_t;
  const double minus = current_at_t > 0.0 || inside(delta_less_neg, t, t_max) ? 0.0 : current_at_t;
  return (plus - minus) / p_infinity;
}

BohmDensityCurve arrival_density(const TimeSeries& current, const TimeSeries& flux, double tol) {
  if (!(current.grid == flux.grid))
    throw Error(ErrorKind::invalid_input, "current and flux must share a time grid");
  BohmDensityCurve curve;
  curve.current = current;
  curve.delta_less = delta_less(flux, current, tol);
  curve.delta_less_neg = delta_less(negated(flux), negated(current), tol);
  // continuum sups of +f and -f, consistent with the refined cut sets
  curve.p_infinity = std::max(integrate_off(current, curve.delta_less, 0), 0.0) +
                     std::max(-integrate_off(current, curve.delta_less_neg, 0), 0.0);
  curve.weak_arrival = curve.p_infinity < 0.5;
  if (!(curve.p_infinity > 0.0))
    throw Error(ErrorKind::degenerate_state, "detection probability never becomes positive");

  Eigen::ArrayXd b(current.size());
  for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = curve.at(current.grid[i], current[i]);
  curve.B = {current.grid, std::move(b), Quantity::bohm_density};
  return curve;
}

double integrate_density(const BohmDensityCurve& curve, int power) {
  return (integrate_off(curve.current, curve.delta_less, power) -
          integrate_off(curve.current, curve.delta_less_neg, power)) /
         curve.p_infinity;
}

MomentReport moments(const BohmDensityCurve& curve, double norm_tolerance) {
  const double total = integrate_density(curve, 0);
  if (!(std::abs(total - 1.0) <= norm_tolerance))
    throw Error(ErrorKind::normalization,
                "Bohmian density integrates to " + std::to_string(total) + ", expected 1");
  MomentReport r;
  r.mean = integrate_density(curve, 1);
  r.second_moment = integrate_density(curve, 2);
  r.variance = r.second_moment - r.mean * r.mean;
  return r;
}

GapReport gap_report(const MomentumWavefunction& phi, const TimeGrid& grid, const GapTolerances& tol) {
  const TimeSeries J = current_series(phi, grid);
  const TimeSeries f = cumulative_flux(J);
  const BohmDensityCurve curve = arrival_density(J, f, tol.cutoff_relative * f.values.abs().maxCoeff());

  GapReport r;
  r.orientation = f.back() >= 0.0 ? 1 : -1;
  const double s = r.orientation;
  const MomentReport m = moments(curve);
  r.t_mean_K = mean_from_current(J);
  r.t_mean_B = s * m.mean;
  r.gap = r.t_mean_K - r.t_mean_B;
  r.bohm_variance = m.variance;
  r.p_infinity = curve.p_infinity;
  r.min_current = J.values.minCoeff();

  // g = s·f rises overall; its dips below the running sup are the cut set
  const quad::Primitive g(s * J.values, grid);
  r.delta_less = s > 0 ? curve.delta_less : curve.delta_less_neg;
  double by_parts = 0.0;
  for (const auto& iv : r.delta_less) {
    const double level = g(iv.a);
    by_parts -= quad::integrate_function([&](double t) { return g(t) - level; }, grid, iv.a, iv.b);
  }
  r.gap_by_F_integral = s * by_parts;
  r.backflow = backflow_intervals(s > 0 ? J : negated(J), tol.backflow_threshold);
  r.has_backflow = s * r.gap > tol.gap;
  return r;
}

}  // namespace arrival
