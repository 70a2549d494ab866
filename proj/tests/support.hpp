#pragma once

// Shared fixtures and hand-rolled generators for the test binaries.

#include "arrival/wavepacket.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace testing_support {

using arrival::complex;

/// splitmix64 stream; every property test owns one with a fixed seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
  complex unit_complex() { return std::polar(1.0, uniform(0.0, 2 * std::numbers::pi)); }
  complex complex_in_disk(double r) { return std::polar(r * std::sqrt(uniform()), uniform(0.0, 2 * std::numbers::pi)); }

 private:
  std::uint64_t state_;
};

inline arrival::MomentumWavefunction gaussian(double k0, double sigma, double x0,
                                              const arrival::KGrid& grid) {
  const arrival::GaussianComponent c{{1.0, 0.0}, k0, sigma, x0};
  return arrival::normalize(arrival::make_gaussian_superposition({}, grid, std::span(&c, 1), "gaussian"));
}

/// The standard packet: k0 = 5, σ = 0.5, starting at x0 = -20.
inline arrival::MomentumWavefunction standard_packet(Eigen::Index n_k = 2048) {
  return gaussian(5.0, 0.5, -20.0, arrival::KGrid(1.0, 9.0, n_k));
}

inline std::vector<arrival::GaussianComponent> backflow_components() {
  return {{{1.0, 0.0}, 5.0, 0.5, -10.0}, {std::polar(0.7, std::numbers::pi), 10.0, 0.5, -20.0}};
}

inline arrival::MomentumWavefunction backflow_state(Eigen::Index n_k = 2048) {
  const auto comps = backflow_components();
  return arrival::normalize(
      arrival::make_gaussian_superposition({}, arrival::KGrid(1.0, 14.0, n_k), comps, "two-gaussian"));
}

/// 1 to 3 random right-moving Gaussians, all inside a common k window.
inline arrival::MomentumWavefunction random_right_mover(Rng& rng, Eigen::Index n_k) {
  std::vector<arrival::GaussianComponent> comps;
  const int count = rng.integer(1, 3);
  for (int i = 0; i < count; ++i) {
    const double sigma = rng.uniform(0.3, 0.7);
    comps.push_back({rng.complex_in_disk(1.0) + complex(0.2, 0.0), rng.uniform(4.0, 8.0), sigma,
                     rng.uniform(-25.0, -15.0)});
  }
  return arrival::normalize(
      arrival::make_gaussian_superposition({}, arrival::KGrid(0.5, 12.0, n_k), comps, "random"));
}

/// Amplitudes with random complex noise on a small grid: no structure at all.
inline arrival::MomentumWavefunction random_amplitudes(Rng& rng, Eigen::Index n_k, double k_min,
                                                       double k_max) {
  Eigen::VectorXcd a(n_k);
  for (Eigen::Index i = 0; i < n_k; ++i) a[i] = rng.complex_in_disk(1.0);
  return arrival::normalize(arrival::MomentumWavefunction({}, arrival::KGrid(k_min, k_max, n_k), a));
}

}  // namespace testing_support
