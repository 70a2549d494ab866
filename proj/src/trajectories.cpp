#include "arrival/trajectories.hpp"

#include "arrival/quadrature.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <array>
#include <numbers>

namespace arrival {

namespace {

// phase recurrences are re-seeded this often to bound rounding drift
constexpr std::size_t kReseed = 64;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in (0, 1), a pure function of (seed, index).
double uniform01(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t bits = splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

double guidance(double hbar_over_mass, complex psi, complex dpsi, double density) {
  return hbar_over_mass * (std::conj(psi) * dpsi).imag() / density;
}

// Dormand-Prince 5(4) tableau
constexpr std::array<double, 7> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr std::array<double, 7> kErr{35.0 / 384 - 5179.0 / 57600, 0.0, 500.0 / 1113 - 7571.0 / 16695,
                                     125.0 / 192 - 393.0 / 640, -2187.0 / 6784 + 92097.0 / 339200,
                                     11.0 / 84 - 187.0 / 2100, -1.0 / 40};

// Cubic Hermite position on a step of length h at fraction s.
double hermite(double x0, double x1, double v0, double v1, double h, double s) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * x0 + (s3 - 2 * s2 + s) * h * v0 + (-2 * s3 + 3 * s2) * x1 +
         (s3 - s2) * h * v1;
}

}  // namespace

VelocityField::VelocityField(const MomentumWavefunction& phi, double epsilon)
    : eval_(phi), hbar_over_mass_(phi.units().hbar_over_mass()), epsilon_(epsilon) {}

VelocityField::Sample VelocityField::sample(double x, double t) const {
  const auto [psi, dpsi] = eval_(x, t);
  const double rho = std::norm(psi);
  return {rho > 0.0 ? guidance(hbar_over_mass_, psi, dpsi, rho) : 0.0, rho};
}

double VelocityField::operator()(double x, double t) const {
  const Sample s = sample(x, t);
  if (!(s.density > epsilon_))
    throw Error(ErrorKind::node_proximity, "density below the node floor at x = " + std::to_string(x));
  return s.velocity;
}

double velocity(const MomentumWavefunction& phi, double x, double t, double epsilon) {
  return VelocityField(phi, epsilon)(x, t);
}

FieldSnapshot::FieldSnapshot(const MomentumWavefunction& phi, double t)
    : hbar_over_mass_(phi.units().hbar_over_mass()) {
  const KGrid& kg = phi.grid();
  const double dk = kg.step();
  const auto nk = static_cast<std::size_t>(kg.size());
  const std::size_t n = next_pow2(8 * nk);
  period_ = 2.0 * std::numbers::pi / dk;
  dx_ = period_ / static_cast<double>(n);
  x_start_ = -0.5 * period_;
  k_center_ = 0.5 * (kg.min() + kg.max());

  const MomentumWavefunction phi_t = evolve(phi, t);
  const Eigen::ArrayXd k = phi.momenta();
  const Eigen::ArrayXd w = phi.weights() / std::sqrt(2.0 * std::numbers::pi);
  // scratch reused per thread; each snapshot overwrites it completely
  static thread_local std::vector<complex> a, da, fa, fda;
  a.assign(n, complex{});
  da.assign(n, complex{});
  const complex shift_step = std::polar(1.0, dk * x_start_);
  complex shift{1.0, 0.0};
  for (std::size_t m = 0; m < nk; ++m) {
    if (m % kReseed == 0) shift = std::polar(1.0, static_cast<double>(m) * dk * x_start_);
    const auto mi = static_cast<Eigen::Index>(m);
    const complex c = w[mi] * phi_t.amplitudes()[mi] * shift;
    a[m] = c;
    da[m] = complex(0.0, k[mi]) * c;
    shift *= shift_step;
  }
  // one plan per thread; its twiddle tables are reused across snapshots
  static thread_local Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  fft.inv(fa, a);
  fft.inv(fda, da);

  envelope_.resize(static_cast<Eigen::Index>(n));
  slope_.resize(static_cast<Eigen::Index>(n));
  // Φ(x_j) = e^{i k_min x_j} · inverse-DFT(a)_j; keep only e^{i (k_min - k_c) x_j} of the carrier
  const double q = kg.min() - k_center_;
  const complex carrier_step = std::polar(1.0, q * dx_);
  complex carrier;
  for (std::size_t j = 0; j < n; ++j) {
    if (j % kReseed == 0) carrier = std::polar(1.0, q * (x_start_ + dx_ * static_cast<double>(j)));
    envelope_[static_cast<Eigen::Index>(j)] = carrier * fa[j];
    slope_[static_cast<Eigen::Index>(j)] = carrier * fda[j];
    carrier *= carrier_step;
  }
}

VelocityField::Sample FieldSnapshot::sample(double x) const {
  // barycentric form of the 8-point Lagrange stencil on unit spacing
  static constexpr std::array<double, 8> kBary{-1.0 / 5040, 1.0 / 720, -1.0 / 240, 1.0 / 144,
                                               -1.0 / 144,  1.0 / 240, -1.0 / 720, 1.0 / 5040};
  const double u = (x - x_start_) / dx_;
  const auto n = envelope_.size();
  auto j0 = static_cast<Eigen::Index>(std::floor(u)) - 3;
  j0 = std::clamp<Eigen::Index>(j0, 0, n - 8);
  const double r = u - static_cast<double>(j0);
  std::array<double, 8> w{};
  double l = 1.0;
  int exact = -1;
  for (int i = 0; i < 8; ++i) {
    const double d = r - i;
    if (d == 0.0) exact = i;
    l *= d;
  }
  if (exact >= 0) {
    w[static_cast<std::size_t>(exact)] = 1.0;
  } else {
    for (int i = 0; i < 8; ++i) w[static_cast<std::size_t>(i)] = l * kBary[static_cast<std::size_t>(i)] / (r - i);
  }
  complex e{}, d{};
  for (int i = 0; i < 8; ++i) {
    e += w[static_cast<std::size_t>(i)] * envelope_[j0 + i];
    d += w[static_cast<std::size_t>(i)] * slope_[j0 + i];
  }
  const double rho = std::norm(e);
  return {rho > 0.0 ? guidance(hbar_over_mass_, e, d, rho) : 0.0, rho};
}

double peak_density(const MomentumWavefunction& phi, double t, const XGrid& x_grid) {
  return to_position(evolve(phi, t), x_grid, t).density().maxCoeff();
}

double TabulatedCdf::operator()(double x) const {
  if (x <= grid.min()) return 0.0;
  if (x >= grid.max()) return 1.0;
  const double u = (x - grid.min()) / grid.step();
  const auto i = std::min<Eigen::Index>(static_cast<Eigen::Index>(u), grid.size() - 2);
  const double s = u - static_cast<double>(i);
  return (1.0 - s) * cdf[i] + s * cdf[i + 1];
}

TabulatedCdf position_cdf(const MomentumWavefunction& phi, double t0, const XGrid& x_grid) {
  const Eigen::ArrayXd rho = to_position(evolve(phi, t0), x_grid, t0).density();
  Eigen::ArrayXd cdf(rho.size());
  cdf[0] = 0.0;
  for (Eigen::Index i = 1; i < rho.size(); ++i)
    cdf[i] = cdf[i - 1] + 0.5 * x_grid.step() * (rho[i - 1] + rho[i]);
  if (!(cdf[cdf.size() - 1] > 0.0)) throw Error(ErrorKind::degenerate_state, "zero position density");
  cdf /= cdf[cdf.size() - 1];
  return {x_grid, std::move(cdf)};
}

std::vector<double> sample_initial_positions(const MomentumWavefunction& phi, double t0,
                                             std::size_t n, std::uint64_t seed, const XGrid& x_grid) {
  if (n < 100) throw Error(ErrorKind::invalid_input, "need at least 100 trajectories");
  const TabulatedCdf table = position_cdf(phi, t0, x_grid);
  const Eigen::ArrayXd& cdf = table.cdf;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = uniform01(seed, i);
    const auto* hit = std::upper_bound(cdf.data(), cdf.data() + cdf.size(), u);
    auto cell = static_cast<Eigen::Index>(hit - cdf.data()) - 1;
    cell = std::clamp<Eigen::Index>(cell, 0, cdf.size() - 2);
    const double span = cdf[cell + 1] - cdf[cell];
    const double s = span > 0.0 ? (u - cdf[cell]) / span : 0.5;
    out[i] = x_grid[cell] + s * x_grid.step();
  }
  return out;
}

double ks_statistic(std::span<const double> samples, const TabulatedCdf& cdf) {
  std::vector<double> xs(samples.begin(), samples.end());
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

TrajectoryEnsemble monte_carlo_detection(const MomentumWavefunction& phi, const TimeGrid& grid,
                                         std::size_t n, std::uint64_t seed, const XGrid& x_grid,
                                         const StepControl& control) {
  TrajectoryEnsemble ens;
  ens.seed = seed;
  ens.t0 = grid.min();
  ens.initial_positions = sample_initial_positions(phi, grid.min(), n, seed, x_grid);
  std::sort(ens.initial_positions.begin(), ens.initial_positions.end());
  ens.crossing_times.assign(n, std::nullopt);

  const double epsilon = control.epsilon_relative * peak_density(phi, grid.min(), x_grid);
  const double h_max = control.max_step_cells * grid.step();

  Eigen::ArrayXd x = Eigen::Map<const Eigen::ArrayXd>(ens.initial_positions.data(), static_cast<Eigen::Index>(n));
  const auto N = x.size();
  for (Eigen::Index j = 0; j < N; ++j)
    if (x[j] >= 0.0) ens.crossing_times[static_cast<std::size_t>(j)] = grid.min();

  // velocities at one stage; counts samples under the node floor
  auto eval = [&](double t, const Eigen::ArrayXd& pos, Eigen::ArrayXd& out, bool& near_node) {
    const FieldSnapshot snap(phi, t);
    for (Eigen::Index j = 0; j < N; ++j) {
      if (std::abs(pos[j]) >= snap.half_period())
        throw Error(ErrorKind::coverage, "trajectory left the periodic domain of the k grid");
      const auto s = snap.sample(pos[j]);
      if (!(s.density > epsilon)) near_node = true;
      out[j] = s.velocity;
    }
  };

  std::array<Eigen::ArrayXd, 7> k;
  for (auto& kk : k) kk.resize(N);
  bool dummy = false;
  eval(grid.min(), x, k[0], dummy);

  double t = grid.min();
  double h = std::min(h_max, grid.step());
  const double t_end = grid.max();
  Eigen::ArrayXd stage(N), x_new(N), err(N);
  while (t < t_end) {
    h = std::min(h, t_end - t);
    bool near_node = false;
    for (int s = 1; s < 7; ++s) {
      stage = x;
      for (int m = 0; m < s; ++m)
        if (kA[s][m] != 0.0) stage += h * kA[s][m] * k[static_cast<std::size_t>(m)];
      eval(t + kC[static_cast<std::size_t>(s)] * h, stage, k[static_cast<std::size_t>(s)], near_node);
    }
    x_new = stage;  // row 7 of the tableau is the 5th-order solution
    err.setZero();
    for (std::size_t m = 0; m < 7; ++m) err += h * kErr[m] * k[m];
    const Eigen::ArrayXd scale = control.atol + control.rtol * x.abs().max(x_new.abs());
    const double e = (err.abs() / scale).maxCoeff();

    const bool forced = h <= control.h_min;
    if ((e > 1.0 || near_node) && !forced) {
      ++ens.rejected_steps;
      h *= near_node ? 0.25 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 1.0);
      continue;
    }
    if (near_node) ++ens.node_failures;

    for (Eigen::Index j = 0; j < N; ++j) {
      auto& crossing = ens.crossing_times[static_cast<std::size_t>(j)];
      if (crossing || !(x[j] < 0.0 && x_new[j] >= 0.0)) continue;
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (hermite(x[j], x_new[j], k[0][j], k[6][j], h, mid) < 0.0 ? lo : hi) = mid;
      }
      crossing = t + 0.5 * (lo + hi) * h;
    }
    x = x_new;
    k[0] = k[6];
    t += h;
    ++ens.accepted_steps;
    const double grow = e > 0.0 ? 0.9 * std::pow(e, -0.2) : 5.0;
    h = std::min(h_max, h * std::clamp(grow, 0.2, 5.0));
  }

  const double failures = static_cast<double>(ens.node_failures) /
                          static_cast<double>(std::max<std::size_t>(ens.accepted_steps, 1));
  if (failures > control.max_node_failure_fraction)
    throw Error(ErrorKind::node_proximity, "too many node-limited steps; scenario rejected");

  ens.final_positions.assign(x.data(), x.data() + N);
  for (std::size_t j = 1; j < ens.final_positions.size(); ++j)
    if (ens.final_positions[j] < ens.final_positions[j - 1]) ++ens.order_violations;

  std::vector<double> times;
  for (const auto& c : ens.crossing_times)
    if (c) times.push_back(*c);
  std::sort(times.begin(), times.end());
  Eigen::ArrayXd p(grid.size()), se(grid.size());
  const double nn = static_cast<double>(n);
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const auto count = std::upper_bound(times.begin(), times.end(), grid[i]) - times.begin();
    p[i] = static_cast<double>(count) / nn;
    se[i] = std::sqrt(p[i] * (1.0 - p[i]) / nn);
  }
  ens.P_hat = {grid, std::move(p), Quantity::detection};
  ens.standard_error = {grid, std::move(se), Quantity::detection};
  return ens;
}

}  // namespace arrival
