#include "support.hpp"

#include "arrival/wavepacket.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace arrival;
using testing_support::Rng;

namespace {

// Free Gaussian density at time t, from the closed-form spreading law (ħ = m = 1).
double gaussian_density(double x, double t, double k0, double sigma_k, double x0) {
  const double sx = 1.0 / (2.0 * sigma_k);
  const double st = sx * std::sqrt(1.0 + std::pow(t / (2.0 * sx * sx), 2));
  const double c = x0 + k0 * t;
  return std::exp(-0.5 * std::pow((x - c) / st, 2)) / (st * std::sqrt(2 * std::numbers::pi));
}

}  // namespace

TEST_CASE("grids reject bad shapes") {
  CHECK_THROWS_AS(KGrid(2.0, 1.0, 64), Error);
  CHECK_THROWS_AS(KGrid(0.0, 1.0, 8), Error);
  CHECK_THROWS_AS(TimeGrid(0.0, 1.0, 10), Error);
  CHECK_NOTHROW(KGrid(0.1, 1.0, 16));
  const TimeGrid g(0.0, 1.0, 101);
  CHECK(g.refined().size() == 201);
  CHECK(g.refined()[2] == doctest::Approx(g[1]).epsilon(1e-15));
}

TEST_CASE("normalize and its failure on the zero state") {
  const KGrid grid(1.0, 9.0, 256);
  const auto phi = testing_support::standard_packet(256);
  CHECK(std::abs(phi.norm_squared() - 1.0) < 1e-12);
  const MomentumWavefunction zero({}, grid, Eigen::VectorXcd::Zero(256));
  CHECK_THROWS_AS(normalize(zero), Error);
  try {
    normalize(zero);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::degenerate_state);
  }
}

TEST_CASE("right mover tail mass is negligible") {
  const auto phi = testing_support::standard_packet();
  CHECK(phi.nonpositive_mass_fraction() < 1e-12);
  CHECK(phi.is_right_mover());
  const GaussianComponent c{{1.0, 0.0}, 5.0, 0.5, -20.0};
  CHECK(gaussian_tail_mass(std::span(&c, 1), 1.0, 9.0) < 1e-12);
  // one sigma on each side leaves about a third of the mass outside
  CHECK(gaussian_tail_mass(std::span(&c, 1), 4.0, 6.0) ==
        doctest::Approx(std::erfc(2.0 / std::sqrt(2.0))).epsilon(1e-12));
}

TEST_CASE("shift_arrival_point is a pure phase") {
  const auto phi = testing_support::standard_packet(512);
  CHECK((shift_arrival_point(phi, 0.0).amplitudes() - phi.amplitudes()).norm() == 0.0);
  const auto back = shift_arrival_point(shift_arrival_point(phi, 3.7), -3.7);
  CHECK((back.amplitudes() - phi.amplitudes()).cwiseAbs().maxCoeff() < 1e-15);
  const auto s = shift_arrival_point(phi, 12.5);
  CHECK((s.amplitudes().cwiseAbs() - phi.amplitudes().cwiseAbs()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("evolve: identity, group law and unitarity") {
  const auto phi = testing_support::standard_packet();
  CHECK((evolve(phi, 0.0).amplitudes() - phi.amplitudes()).norm() == 0.0);
  const auto two = evolve(evolve(phi, 1.3), 2.4);
  const auto one = evolve(phi, 3.7);
  CHECK((two.amplitudes() - one.amplitudes()).cwiseAbs().maxCoeff() < 1e-13);
  for (int t = -10; t <= 10; ++t) {
    CHECK(std::abs(evolve(phi, t).norm_squared() - phi.norm_squared()) < 1e-14);
    CHECK((evolve(phi, t).amplitudes().cwiseAbs() - phi.amplitudes().cwiseAbs()).cwiseAbs().maxCoeff() <
          1e-15);
  }
}

TEST_CASE("to_position reproduces the closed-form Gaussian") {
  // ±12 σ in k, so truncation of the Fourier integral sits below rounding
  const auto phi = testing_support::gaussian(5.0, 0.5, -20.0, KGrid(-1.0, 11.0, 4096));
  const XGrid xg(-60.0, 60.0, 4096);
  for (double t : {0.0, 4.0}) {
    const auto field = to_position(evolve(phi, t), xg, t);
    const Eigen::ArrayXd rho = field.density();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < xg.size(); ++i)
      worst = std::max(worst, std::abs(rho[i] - gaussian_density(xg[i], t, 5.0, 0.5, -20.0)));
    CHECK(worst < 1e-10);
    CHECK(std::abs(field.norm_squared() - 1.0) < 1e-8);

    Eigen::Index peak;
    rho.maxCoeff(&peak);
    const double mean = (rho * xg.points()).sum() / rho.sum();
    CHECK(std::abs(mean - (-20.0 + 5.0 * t)) < 0.05);
  }
  // at t = 0 the width is 1 / (2 σ_k) = 1
  const auto rho0 = to_position(phi, xg).density();
  const double m1 = (rho0 * xg.points()).sum() / rho0.sum();
  const double var = (rho0 * (xg.points() - m1).square()).sum() / rho0.sum();
  CHECK(std::sqrt(var) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("to_position refuses an undersampled x grid") {
  const auto phi = testing_support::standard_packet(256);
  try {
    to_position(phi, XGrid(-60.0, 60.0, 128));
    FAIL("expected a resolution error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::resolution);
  }
}

TEST_CASE("point evaluator agrees with the grid transform") {
  const auto phi = testing_support::backflow_state(1024);
  const XGrid xg(-60.0, 60.0, 2048);
  const double t = 1.7;
  const auto field = to_position(evolve(phi, t), xg, t);
  const PointEvaluator eval(phi);
  for (Eigen::Index i = 0; i < xg.size(); i += 97) {
    const auto v = eval(xg[i], t);
    CHECK(std::abs(v.psi - field.values[i]) < 1e-12);
  }
  // derivative against a centered difference
  const double x = -3.3, h = 1e-5;
  const complex fd = (eval(x + h, t).psi - eval(x - h, t).psi) / (2 * h);
  CHECK(std::abs(eval(x, t).dpsi - fd) < 1e-7);
}

TEST_CASE("parity maps the grid and the momenta") {
  const auto phi = testing_support::standard_packet(256);
  const auto p = parity(phi);
  CHECK(p.grid().min() == -9.0);
  CHECK(p.grid().max() == -1.0);
  CHECK(std::abs(p.norm_squared() - phi.norm_squared()) < 1e-15);
  CHECK(p.nonpositive_mass_fraction() == doctest::Approx(1.0));
  CHECK(p.amplitudes()[0] == phi.amplitudes()[255]);
}

TEST_CASE("superpose and inner are sesquilinear") {
  Rng rng(11);
  const auto a = testing_support::random_amplitudes(rng, 64, 1.0, 4.0);
  const auto b = testing_support::random_amplitudes(rng, 64, 1.0, 4.0);
  const complex c = rng.complex_in_disk(2.0);
  const auto s = superpose(c, a, 1.0, b);
  CHECK(std::abs(inner(a, s) - (c * inner(a, a) + inner(a, b))) < 1e-13);
  CHECK(std::abs(inner(s, a) - (std::conj(c) * inner(a, a) + inner(b, a))) < 1e-13);
  CHECK(std::abs(inner(a, b) - std::conj(inner(b, a))) < 1e-15);
}
