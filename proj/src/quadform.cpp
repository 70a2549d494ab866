#include "arrival/quadform.hpp"

#include "arrival/quadrature.hpp"

#include <Eigen/QR>

#include <numbers>

namespace arrival {

namespace {

MomentumWavefunction arc_point(const MomentumWavefunction& phi, const MomentumWavefunction& psi, double xi) {
  return normalize(superpose(std::cos(xi), phi, std::sin(xi), psi));
}

Eigen::ArrayXd arc_grid(Eigen::Index m) {
  if (m < 33) throw Error(ErrorKind::invalid_input, "scan needs at least 33 points");
  return Eigen::ArrayXd::LinSpaced(m, 0.0, 0.5 * std::numbers::pi);
}

ArcValue evaluate(const Arc& arc, double xi) {
  try {
    return arc.value(xi);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(e.what()) + " (at xi = " + std::to_string(xi) + ")");
  }
}

}  // namespace

ArcPair construct_arc_pair(const MomentumWavefunction& phi_base,
                                        const MomentumWavefunction& psi_base, const TimeGrid& grid,
                                        const PairOptions& options) {
  if (!(phi_base.grid() == psi_base.grid()))
    throw Error(ErrorKind::construction, "pair states must share a k grid");
  ArcPair pair;

  const TimeSeries j_psi = current_series(psi_base, grid);
  Eigen::Index lowest = 0;
  const double j_min = j_psi.values.minCoeff(&lowest);
  if (!(j_min < -options.backflow_threshold))
    throw Error(ErrorKind::construction, "state '" + psi_base.label() + "' shows no backflow on the grid");
  pair.psi_time_shift = grid[lowest];

  const TimeSeries j_phi = current_series(phi_base, grid);
  if (j_phi.values.minCoeff() < -1e-10)
    throw Error(ErrorKind::construction, "state '" + phi_base.label() + "' is not backflow-free");
  Eigen::Index peak = 0;
  const double j_max = j_phi.values.maxCoeff(&peak);
  Eigen::Index rise = 0;
  while (rise < peak && j_phi[rise] < options.phi_current_fraction * j_max) ++rise;
  pair.phi_time_shift = grid[rise];

  const MomentumWavefunction phi0 = normalize(evolve(phi_base, pair.phi_time_shift));
  pair.psi = normalize(evolve(psi_base, pair.psi_time_shift)).relabeled(psi_base.label());

  // Two phases make ⟨φ, ψ⟩ purely imaginary; keep the one whose current
  // cross term at t = 0 is more negative.
  const complex z = inner(phi0, pair.psi);
  const double base = std::abs(z) > 0.0 ? std::arg(z) : 0.0;
  double best_cross = 0.0;
  bool first = true;
  for (const double alpha : {base + 0.5 * std::numbers::pi, base - 0.5 * std::numbers::pi}) {
    const MomentumWavefunction rotated = phi0.with_amplitudes(std::polar(1.0, alpha) * phi0.amplitudes());
    const double cross = current_at_origin(superpose(1.0, rotated, 1.0, pair.psi), 0.0) -
                         current_at_origin(rotated, 0.0) - current_at_origin(pair.psi, 0.0);
    if (first || cross < best_cross) {
      first = false;
      best_cross = cross;
      pair.phase = alpha;
      pair.phi = rotated.relabeled(phi_base.label());
    }
  }
  pair.overlap = inner(pair.phi, pair.psi);
  pair.phi_current = current_at_origin(pair.phi, 0.0);
  pair.psi_current = current_at_origin(pair.psi, 0.0);
  return pair;
}

Arc bohm_arc(const MomentumWavefunction& phi, const MomentumWavefunction& psi, const TimeGrid& grid,
             double cutoff_relative) {
  Arc arc{phi.label(), psi.label(), "bohm", inner(phi, psi), {}};
  arc.value = [phi, psi, grid, cutoff_relative](double xi) {
    const MomentumWavefunction state = arc_point(phi, psi, xi);
    const TimeSeries J = current_series(state, grid);
    const TimeSeries f = cumulative_flux(J);
    const BohmDensityCurve curve = arrival_density(J, f, cutoff_relative * f.values.abs().maxCoeff());
    const double j0 = current_at_origin(state, 0.0);
    const double b = curve.at(0.0, j0);
    ArcValue v;
    v.beta = b;
    v.branch = b == 0.0 ? 0 : (b * j0 > 0.0 ? 1 : -1);
    return v;
  };
  return arc;
}

Arc form_arc(const QuadraticFormModel& q, const MomentumWavefunction& phi,
             const MomentumWavefunction& psi) {
  Arc arc{phi.label(), psi.label(), q.name, inner(phi, psi), {}};
  arc.value = [q, phi, psi](double xi) { return ArcValue{q(arc_point(phi, psi, xi)), 1}; };
  return arc;
}

SuperpositionScan scan(const Arc& arc, Eigen::Index m) {
  SuperpositionScan s;
  s.xi = arc_grid(m);
  s.beta.resize(m);
  s.branch.resize(m);
  s.phi_label = arc.phi_label;
  s.psi_label = arc.psi_label;
  s.quantity = arc.quantity;
  s.overlap = arc.overlap;
  for (Eigen::Index i = 0; i < m; ++i) {
    const ArcValue v = evaluate(arc, s.xi[i]);
    s.beta[i] = v.beta;
    s.branch[i] = v.branch;
  }
  return s;
}

SuperpositionScan superposition_scan(const MomentumWavefunction& phi, const MomentumWavefunction& psi,
                                     Eigen::Index m, const TimeGrid& grid, double cutoff_relative) {
  return scan(bohm_arc(phi, psi, grid, cutoff_relative), m);
}

SuperpositionScan form_scan(const QuadraticFormModel& q, const MomentumWavefunction& phi,
                            const MomentumWavefunction& psi, Eigen::Index m) {
  return scan(form_arc(q, phi, psi), m);
}

SinusoidFit sinusoid_fit(const Eigen::ArrayXd& xi, const Eigen::ArrayXd& beta,
                         const Eigen::ArrayXd& weights) {
  const Eigen::Index m = xi.size();
  const Eigen::VectorXd root_w = weights.sqrt().matrix();
  const Eigen::VectorXd wb = root_w.cwiseProduct(beta.matrix());
  const double norm = wb.norm();
  if (!(norm > 0.0)) throw Error(ErrorKind::degenerate_state, "scan is identically zero");

  Eigen::MatrixXd x(m, 3);
  x.col(0).setOnes();
  x.col(1) = (2.0 * xi).cos().matrix();
  x.col(2) = (2.0 * xi).sin().matrix();
  const Eigen::MatrixXd wx = root_w.asDiagonal() * x;
  const Eigen::Vector3d coef = wx.colPivHouseholderQr().solve(wb);

  SinusoidFit fit;
  fit.a = coef[0];
  fit.b = coef[1];
  fit.c = coef[2];
  const Eigen::VectorXd residual = wb - wx * coef;
  fit.fitted = (x * coef).array();
  fit.residual_rel = residual.norm() / norm;
  fit.normal_residual = (wx.transpose() * residual).norm() / (wx.norm() * norm);
  return fit;
}

SinusoidFit sinusoid_fit(const SuperpositionScan& scan) {
  return sinusoid_fit(scan.xi, scan.beta, Eigen::ArrayXd::Ones(scan.xi.size()));
}

SinusoidFit arc_fit(const Arc& arc, const SuperpositionScan& s, int nodes_per_piece,
                    double switch_tolerance) {
  const Eigen::Index m = s.xi.size();
  // piece boundaries: ends of the arc plus every located switch
  std::vector<double> cuts{s.xi[0]};
  std::vector<int> branches{s.branch[0]};
  std::vector<double> switches;
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    if (s.branch[i] == s.branch[i + 1]) continue;
    double lo = s.xi[i];
    double hi = s.xi[i + 1];
    const int left = s.branch[i];
    while (hi - lo > switch_tolerance) {
      const double mid = 0.5 * (lo + hi);
      (evaluate(arc, mid).branch == left ? lo : hi) = mid;
    }
    const double at = 0.5 * (lo + hi);
    switches.push_back(at);
    cuts.push_back(at);
    branches.push_back(s.branch[i + 1]);
  }
  cuts.push_back(s.xi[m - 1]);

  const quad::GaussRule rule = quad::gauss_legendre(nodes_per_piece);
  const auto pieces = static_cast<Eigen::Index>(branches.size());
  Eigen::ArrayXd xi(pieces * nodes_per_piece), beta(xi.size()), w(xi.size());
  Eigen::Index k = 0;
  for (Eigen::Index p = 0; p < pieces; ++p) {
    const double lo = cuts[static_cast<std::size_t>(p)];
    const double hi = cuts[static_cast<std::size_t>(p) + 1];
    const int branch = branches[static_cast<std::size_t>(p)];
    for (Eigen::Index q = 0; q < nodes_per_piece; ++q, ++k) {
      xi[k] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * rule.nodes[q];
      w[k] = 0.5 * (hi - lo) * rule.weights[q];
      if (branch == 0) {
        beta[k] = 0.0;
        continue;
      }
      const ArcValue v = evaluate(arc, xi[k]);
      if (v.branch != branch)
        throw Error(ErrorKind::resolution,
                    "cutoff branch changes between scan points near xi = " + std::to_string(xi[k]) +
                        "; increase the number of scan points");
      beta[k] = v.beta;
    }
  }

  SinusoidFit fit = sinusoid_fit(xi, beta, w);
  fit.norm = FitNorm::arc;
  fit.switches = std::move(switches);
  fit.fitted = fit.a + fit.b * (2.0 * s.xi).cos() + fit.c * (2.0 * s.xi).sin();
  return fit;
}

ViolationReport violation_report(const SuperpositionScan& scan, const SinusoidFit& fit,
                                 const ViolationTolerances& tol) {
  ViolationReport r;
  const Eigen::Index m = scan.beta.size();
  r.beta0 = scan.beta[0];
  r.residual_rel = fit.residual_rel;
  r.overlap = scan.overlap;

  const double zero = tol.zero_relative * scan.beta.maxCoeff();
  Eigen::Index start = m;
  while (start > 0 && std::abs(scan.beta[start - 1]) <= zero) --start;
  if (start < m) {
    r.plateau_start = scan.xi[start];
    r.plateau_fraction = (scan.xi[m - 1] - scan.xi[start]) / (scan.xi[m - 1] - scan.xi[0]);
  }

  r.positive_witness = r.beta0 > tol.positive;
  r.plateau_witness = r.plateau_start.has_value() && r.plateau_fraction >= tol.plateau_fraction;
  r.misfit_witness = r.residual_rel > tol.residual;
  r.violated = r.positive_witness && r.plateau_witness && r.misfit_witness;
  auto note = [&r](bool ok, const char* name) {
    if (ok) return;
    if (!r.failed.empty()) r.failed += ", ";
    r.failed += name;
  };
  note(r.positive_witness, "positive beta(0)");
  note(r.plateau_witness, "zero plateau");
  note(r.misfit_witness, "sinusoid misfit");
  return r;
}

}  // namespace arrival
