#include "support.hpp"

#include "arrival/bohm.hpp"
#include "arrival/trajectories.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace arrival;

TEST_CASE("velocity at the packet center") {
  const auto packet = testing_support::standard_packet();
  // the centre of the packet at t is x0 + k0 t
  CHECK(std::abs(velocity(packet, -20.0, 0.0) - 5.0) < 0.1);
  CHECK(std::abs(velocity(packet, 0.0, 4.0) - 5.0) < 0.1);
  // narrow in k: de Broglie velocity throughout the bulk
  const auto narrow = testing_support::gaussian(5.0, 0.05, 0.0, KGrid(4.2, 5.8, 2048));
  for (double x : {-10.0, -5.0, 0.0, 5.0, 10.0}) CHECK(std::abs(velocity(narrow, x, 0.0) - 5.0) < 0.1);
}

TEST_CASE("velocity of a real nodeless profile vanishes") {
  // a Gaussian centred at k = 0 has a real, positive Φ_0
  const auto phi = testing_support::gaussian(0.0, 0.5, 0.0, KGrid(-4.0, 4.0, 1024));
  for (double x : {-2.0, -0.5, 0.0, 0.7, 1.9}) CHECK(std::abs(velocity(phi, x, 0.0)) < 1e-12);
}

TEST_CASE("velocity field throws near nodes") {
  const auto packet = testing_support::standard_packet(1024);
  const VelocityField v(packet, 1e-6);
  try {
    v(40.0, 0.0);
    FAIL("expected a node-proximity error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::node_proximity);
  }
}

TEST_CASE("FFT snapshot agrees with the pointwise field") {
  const auto psi = testing_support::backflow_state();
  const VelocityField exact(psi, 0.0);
  for (double t : {0.0, 1.3, 2.9}) {
    const FieldSnapshot snap(psi, t);
    for (double x : {-17.3, -8.0, -1.1, 0.0, 2.25}) {
      const auto a = exact.sample(x, t);
      const auto b = snap.sample(x);
      CHECK(std::abs(a.density - b.density) < 1e-9);
      if (a.density > 1e-6) CHECK(std::abs(a.velocity - b.velocity) < 1e-6);
    }
  }
}

TEST_CASE("initial positions: determinism, mean and KS") {
  const auto packet = testing_support::standard_packet();
  const XGrid xg(-40.0, 40.0, 4096);
  const std::size_t n = 10000;
  const auto a = sample_initial_positions(packet, 0.0, n, 4242, xg);
  const auto b = sample_initial_positions(packet, 0.0, n, 4242, xg);
  CHECK(a == b);
  const double mean = std::accumulate(a.begin(), a.end(), 0.0) / n;
  // σ_x = 1 at t = 0
  CHECK(std::abs(mean + 20.0) < 3.0 / std::sqrt(double(n)));
  CHECK(ks_statistic(a, position_cdf(packet, 0.0, xg)) < ks_critical_1pct(n));
  const auto c = sample_initial_positions(packet, 0.0, n, 4243, xg);
  CHECK(a != c);
}

TEST_CASE("small Monte Carlo run against the analytic detection probability") {
  const auto psi = testing_support::backflow_state();
  const TimeGrid grid(0.0, 10.0, 2000);
  const XGrid xg(-40.0, 40.0, 4096);
  const auto P = detection_probability(cumulative_flux(current_series(psi, grid))).P;

  const auto small = monte_carlo_detection(psi, grid, 400, 77, xg);
  const auto large = monte_carlo_detection(psi, grid, 1600, 77, xg);
  CHECK(small.order_violations == 0);
  CHECK(large.order_violations == 0);
  CHECK(std::is_sorted(large.final_positions.begin(), large.final_positions.end()));
  for (Eigen::Index i = 1; i < large.P_hat.size(); ++i) CHECK(large.P_hat[i] >= large.P_hat[i - 1]);
  CHECK(large.P_hat.values.minCoeff() >= 0.0);
  CHECK(large.P_hat.values.maxCoeff() <= 1.0);

  // checkpoint where P = 1/2
  Eigen::Index mid = 0;
  while (P[mid] < 0.5) ++mid;
  for (const auto* e : {&small, &large}) {
    const double se = std::sqrt(P[mid] * (1 - P[mid]) / double(e->initial_positions.size()));
    CHECK(std::abs(e->P_hat[mid] - P[mid]) <= 4 * se);
  }
  const double ratio = small.standard_error[mid] / large.standard_error[mid];
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.2));

  const auto again = monte_carlo_detection(psi, grid, 400, 77, xg);
  CHECK(again.crossing_times == small.crossing_times);
}
