#include "arrival/scenario.hpp"

#include "arrival/quadrature.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

namespace arrival::scenario {

namespace {

using json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

TimeGrid make_time_grid(const GridSpec& g) { return TimeGrid(g.min, g.max, g.n); }
XGrid make_x_grid(const GridSpec& g) { return XGrid(g.min, g.max, g.n); }

json grid_json(const UniformGrid& g) { return json{{"min", g.min()}, {"max", g.max()}, {"n", g.size()}}; }

json intervals_json(const IntervalList& list) {
  json out = json::array();
  for (const auto& iv : list) out.push_back(json::array({iv.a, iv.b}));
  return out;
}

json complex_json(complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

class Recorder {
 public:
  void add(std::string name, bool passed, double value, double limit, std::string detail = {}) {
    checks_.push_back({std::move(name), passed, value, limit, std::move(detail)});
  }
  const std::vector<CheckResult>& checks() const { return checks_; }

 private:
  std::vector<CheckResult> checks_;
};

// Pipeline for one state on one time grid, computed once and shared by the checks.
struct Pipeline {
  MomentumWavefunction phi;
  TimeGrid grid;
  TimeSeries J;
  TimeSeries f;
  DetectionCurve detection;
  BohmDensityCurve bohm;
  int orientation = 1;  ///< sign of f(t_max)

  Pipeline(MomentumWavefunction state, const TimeGrid& g, double cutoff_relative)
      : phi(std::move(state)),
        grid(g),
        J(current_series(phi, grid)),
        f(cumulative_flux(J)),
        detection(detection_probability(f)),
        bohm(arrival_density(J, f, cutoff_relative * f.values.abs().maxCoeff())),
        orientation(f.back() >= 0.0 ? 1 : -1) {}
};

// First node where `series` (times `sign`) reaches `level`.
std::optional<Eigen::Index> first_reaching(const TimeSeries& series, double level, int sign = 1) {
  for (Eigen::Index i = 0; i < series.size(); ++i)
    if (sign * series[i] >= level) return i;
  return std::nullopt;
}

double mass_right_of_origin(const MomentumWavefunction& phi, double t, const XGrid& x_grid) {
  return flux_via_position(phi, t, x_grid);
}

json wavepacket_checks(const MomentumWavefunction& phi, const StateSpec& spec, const TimeGrid& grid,
                       const XGrid& x_grid, const std::optional<LocalizationSpec>& loc, const Tolerances& tol,
                       Recorder& rec, const std::string& prefix) {
  json out;
  out["label"] = phi.label();
  out["k_grid"] = grid_json(phi.grid());
  const double norm2 = phi.norm_squared();
  out["norm_squared"] = norm2;

  double drift = 0.0;
  json drift_times = json::array();
  for (const double t : {grid.min(), 0.5 * (grid.min() + grid.max()), grid.max()}) {
    drift = std::max(drift, std::abs(evolve(phi, t).norm_squared() - norm2));
    drift_times.push_back(t);
  }
  out["norm_drift"] = drift;
  out["norm_drift_times"] = drift_times;
  rec.add(prefix + "unitarity", drift < tol.unitarity, drift, tol.unitarity);

  // Parseval at the time the flux is half done, when the packet sits on the x grid
  const TimeSeries f = cumulative_flux(current_series(phi, grid));
  const int s = f.back() >= 0.0 ? 1 : -1;
  const double t_half = grid[first_reaching(f, 0.5 * std::abs(f.back()), s).value_or(0)];
  const double x_norm = to_position(evolve(phi, t_half), x_grid, t_half).norm_squared();
  const double parseval = std::abs(x_norm - norm2);
  out["parseval_time"] = t_half;
  out["x_norm_squared"] = x_norm;
  out["parseval_error"] = parseval;
  rec.add(prefix + "parseval", parseval < tol.parseval, parseval, tol.parseval);

  // tails: mass the k grid cuts off, and mass of the continuous packet moving the wrong way
  const KGrid& kg = phi.grid();
  const double lo = spec.parity ? -kg.max() : kg.min();
  const double hi = spec.parity ? -kg.min() : kg.max();
  const double truncated = gaussian_tail_mass(spec.components, lo, hi);
  const double wrong_way = gaussian_tail_mass(spec.components, 0.0, kInf);
  out["truncated_tail_mass"] = truncated;
  out["wrong_direction_tail_mass"] = wrong_way;
  out["grid_wrong_direction_mass"] =
      spec.parity ? parity(phi).nonpositive_mass_fraction() : phi.nonpositive_mass_fraction();
  rec.add(prefix + "tail_mass", wrong_way < 1e-12, wrong_way, 1e-12, "k <= 0 mass of the continuous packet");

  if (loc) {
    const XGrid lx = make_x_grid(loc->x_grid);
    json masses = json::array();
    std::vector<double> m;
    for (const double t : loc->times) {
      m.push_back(mass_right_of_origin(phi, t, lx));
      masses.push_back(json{{"t", t}, {"mass_right", m.back()}});
    }
    out["localization"] = masses;
    const bool right = s > 0;
    const double early = right ? m.front() : 1.0 - m.front();
    const double late = right ? 1.0 - m.back() : m.back();
    const double worst = std::max(early, late);
    rec.add(prefix + "localization", worst < tol.localization, worst, tol.localization,
            "mass on the far side at the first time and on the near side at the last");
  }
  return out;
}

json current_checks(const Pipeline& p, const XGrid& x_grid, const Tolerances& tol, Recorder& rec) {
  json out;
  const int s = p.orientation;
  const double m0 = mass_right_of_origin(p.phi, p.grid.min(), x_grid);
  json points = json::array();
  double worst = 0.0;
  for (const double level : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const auto i = first_reaching(p.f, level, s);
    if (!i) throw Error(ErrorKind::coverage, "cumulative flux never reaches " + std::to_string(level));
    const double t = p.grid[*i];
    const double by_position = mass_right_of_origin(p.phi, t, x_grid) - m0;
    const double diff = std::abs(by_position - p.f[*i]);
    worst = std::max(worst, diff);
    points.push_back(json{{"t", t}, {"f", p.f[*i]}, {"by_position", by_position}, {"difference", diff}});
  }
  out["flux_checkpoints"] = points;
  out["flux_max_difference"] = worst;
  rec.add("flux_cross_check", worst < tol.flux_agreement, worst, tol.flux_agreement);

  // f stays within [0, 1] for right movers and [-1, 0] for left movers
  const double f_lo = p.f.values.minCoeff();
  const double f_hi = p.f.values.maxCoeff();
  const double excess = s > 0 ? std::max(-f_lo, f_hi - 1.0) : std::max(-1.0 - f_lo, f_hi);
  out["f_min"] = f_lo;
  out["f_max"] = f_hi;
  rec.add("flux_range", excess <= tol.flux_range, excess, tol.flux_range);

  const double final_error = std::abs(p.f.back() - s * p.phi.norm_squared());
  out["f_final"] = p.f.back();
  rec.add("final_flux", final_error < tol.final_flux, final_error, tol.final_flux);

  // the doubled time grid has every old node as a node
  const TimeGrid fine = p.grid.refined();
  const double f_fine = cumulative_flux(current_series(p.phi, fine)).back();
  const double change = std::abs(f_fine - p.f.back());
  out["f_final_doubled_grid"] = f_fine;
  rec.add("time_grid_convergence", change < 1e-7, change, 1e-7);

  const IntervalList backflow = backflow_intervals(s > 0 ? p.J : TimeSeries{p.grid, -p.J.values, p.J.quantity},
                                                   tol.gap.backflow_threshold);
  out["min_current"] = p.J.values.minCoeff();
  out["max_current"] = p.J.values.maxCoeff();
  out["backflow_intervals"] = intervals_json(backflow);
  return out;
}

json kijowski_checks(const Pipeline& p, const Tolerances& tol, Recorder& rec) {
  const QuadraticFormModel q = q0_form();
  const AxiomReport axioms = axiom_check(q, p.phi, p.grid, tol.axioms);
  const TimeSeries density = density_series(q, p.phi, p.grid);
  const MomentReport m = moments(density, tol.kijowski_norm);
  const double t_mean_current = mean_from_current(p.J);
  const double integral = quad::moment(density.values, p.grid, 0);

  auto axiom = [](const AxiomResult& a) {
    return json{{"passed", a.passed}, {"value", a.value}, {"limit", a.limit}};
  };
  json out;
  out["state_label"] = p.phi.label();
  out["t_mean_current"] = t_mean_current;
  out["t_mean_q0"] = m.mean;
  out["variance_q0"] = m.variance;
  out["integral_q0"] = integral;
  out["axiom_results"] = json{{"positivity", axiom(axioms.positivity)},
                              {"conjugation", axiom(axioms.conjugation)},
                              {"normalization", axiom(axioms.normalization)},
                              {"second_moment", axiom(axioms.second_moment)}};
  rec.add("kijowski_axioms", axioms.all_passed(), axioms.all_passed() ? 0.0 : 1.0, 0.0,
          "positivity, conjugation, normalization, second moment");
  rec.add("kijowski_normalization", std::abs(integral - 1.0) < tol.kijowski_norm, std::abs(integral - 1.0),
          tol.kijowski_norm);
  const double mean_gap = std::abs(t_mean_current - m.mean);
  rec.add("first_moment_agreement", mean_gap < tol.mean_agreement, mean_gap, tol.mean_agreement,
          "mean from t J against mean from q0");
  return out;
}

json gap_json(const GapReport& g) {
  return json{{"t_mean_K", g.t_mean_K},
              {"t_mean_B", g.t_mean_B},
              {"gap", g.gap},
              {"gap_by_F_integral", g.gap_by_F_integral},
              {"has_backflow", g.has_backflow},
              {"orientation", g.orientation},
              {"p_infinity", g.p_infinity},
              {"min_current", g.min_current},
              {"bohm_variance", g.bohm_variance},
              {"delta_less", intervals_json(g.delta_less)},
              {"backflow_intervals", intervals_json(g.backflow)}};
}

json bohm_checks(const Pipeline& p, const Scenario& sc, Recorder& rec) {
  const Tolerances& tol = sc.tolerances;
  const GapReport g = gap_report(p.phi, p.grid, tol.gap);
  json out = gap_json(g);
  if (!sc.expect_backflow) return out;

  if (!*sc.expect_backflow) {
    rec.add("gap_equality", std::abs(g.gap) < tol.gap_equality, std::abs(g.gap), tol.gap_equality);
    const double pointwise = (p.bohm.B.values - p.J.values).abs().maxCoeff();
    out["max_abs_B_minus_J"] = pointwise;
    rec.add("bohm_equals_current", pointwise < tol.pointwise, pointwise, tol.pointwise);
    rec.add("no_backflow", !g.has_backflow, g.has_backflow ? 1.0 : 0.0, 0.0);
  } else {
    const double depth = p.orientation > 0 ? p.J.values.minCoeff() : -p.J.values.maxCoeff();
    rec.add("backflow_depth", depth < -tol.backflow_depth, depth, -tol.backflow_depth,
            "most negative current, in the direction of travel");
    rec.add("gap_positive", g.has_backflow, g.orientation * g.gap, tol.gap.gap,
            "signed gap in the direction of travel");
    const double identity = std::abs(g.gap - g.gap_by_F_integral);
    rec.add("gap_identity", identity < tol.gap_identity, identity, tol.gap_identity,
            "moment difference against the integral of f over the cut set");
    rec.add("backflow_intervals", !g.backflow.empty(), static_cast<double>(g.backflow.size()), 1.0);
    // sampled B against J, branch by branch: each branch keeps J off its own cut set
    double pointwise = 0.0;
    for (Eigen::Index i = 0; i < p.J.size(); ++i) {
      const double t = p.grid[i], j = p.J[i];
      const double plus = j >= 0.0 && !contains(p.bohm.delta_less, t) ? j : 0.0;
      const double minus = j <= 0.0 && !contains(p.bohm.delta_less_neg, t) ? j : 0.0;
      pointwise = std::max(pointwise, std::abs(p.bohm.B[i] - (plus - minus) / p.bohm.p_infinity));
    }
    out["max_abs_B_pointwise_error"] = pointwise;
    rec.add("bohm_pointwise", pointwise < tol.pointwise, pointwise, tol.pointwise,
            "B against J with each branch cut on its own set");
  }
  return out;
}

json mirror_checks(const Pipeline& p, const Scenario& sc, Recorder& rec) {
  StateSpec original = *sc.state;
  original.parity = false;
  const MomentumWavefunction base = build_state(original, sc.units, sc.arrival_point);
  const GapReport g_base = gap_report(base, p.grid, sc.tolerances.gap);
  const GapReport g_mirror = gap_report(p.phi, p.grid, sc.tolerances.gap);
  const double size_diff = std::abs(std::abs(g_mirror.gap) - std::abs(g_base.gap));
  rec.add("mirror_gap_size", size_diff < sc.tolerances.mirror, size_diff, sc.tolerances.mirror);
  rec.add("mirror_order", g_mirror.t_mean_K <= g_mirror.t_mean_B, g_mirror.t_mean_K - g_mirror.t_mean_B, 0.0,
          "t_mean_K <= t_mean_B for the mirrored state");
  return json{{"original", gap_json(g_base)}, {"mirrored", gap_json(g_mirror)}, {"gap_size_difference", size_diff}};
}

json montecarlo_checks(const Pipeline& p, const Scenario& sc, std::uint64_t seed, const XGrid& x_grid,
                       const std::filesystem::path& out_dir, Recorder& rec) {
  const MonteCarloSpec& mc = *sc.montecarlo;
  const TrajectoryEnsemble e = monte_carlo_detection(p.phi, p.grid, mc.trajectories, seed, x_grid, mc.control);
  const double n = static_cast<double>(mc.trajectories);
  const TimeSeries& P = p.detection.P;

  json checkpoints = json::array(), p_hat = json::array(), p_ref = json::array(), stderr_json = json::array(),
       sigma = json::array();
  double worst = 0.0;
  for (const double level : mc.levels) {
    const auto i = first_reaching(P, level);
    if (!i) throw Error(ErrorKind::coverage, "detection probability never reaches " + std::to_string(level));
    const double ph = e.P_hat[*i];
    const double se = std::sqrt(ph * (1.0 - ph) / n);
    const double dev = std::abs(ph - P[*i]);
    const double z = se > 0.0 ? dev / se : (dev == 0.0 ? 0.0 : kInf);
    worst = std::max(worst, z);
    checkpoints.push_back(p.grid[*i]);
    p_hat.push_back(ph);
    p_ref.push_back(P[*i]);
    stderr_json.push_back(se);
    sigma.push_back(z);
  }
  rec.add("montecarlo_agreement", worst <= sc.tolerances.monte_carlo_sigmas, worst, sc.tolerances.monte_carlo_sigmas,
          "largest |P_hat - P| in standard errors");
  rec.add("trajectory_order", e.order_violations == 0, static_cast<double>(e.order_violations), 0.0);

  // across every cut interval the crossed fraction should stay flat
  double flat = 0.0;
  for (const auto& iv : p.bohm.delta_less) {
    const auto a = static_cast<Eigen::Index>(std::ceil((iv.a - p.grid.min()) / p.grid.step()));
    const auto b = static_cast<Eigen::Index>(std::floor((iv.b - p.grid.min()) / p.grid.step()));
    if (b <= a || b >= p.grid.size()) continue;
    const double se = std::max(e.standard_error[b], 1.0 / n);
    flat = std::max(flat, (e.P_hat[b] - e.P_hat[a]) / se);
  }
  rec.add("montecarlo_flat_on_cut_set", flat <= sc.tolerances.monte_carlo_sigmas, flat,
          sc.tolerances.monte_carlo_sigmas, "rise of P_hat across cut intervals in standard errors");

  if (sc.outputs.trajectories && !out_dir.empty()) {
    std::ofstream csv(out_dir / "trajectories.csv", std::ios::binary);
    csv << "index,x_init,crossing_time\n";
    for (std::size_t i = 0; i < e.initial_positions.size(); ++i) {
      csv << i << ',' << format_number(e.initial_positions[i]) << ',';
      if (e.crossing_times[i]) csv << format_number(*e.crossing_times[i]);
      csv << '\n';
    }
  }
  return json{{"N", mc.trajectories},
              {"seed", seed},
              {"levels", mc.levels},
              {"checkpoints", checkpoints},
              {"P_hat", p_hat},
              {"P", p_ref},
              {"stderr", stderr_json},
              {"deviation_sigma", sigma},
              {"max_deviation_sigma", worst},
              {"max_rise_on_cut_set_sigma", flat},
              {"order_violations", e.order_violations},
              {"accepted_steps", e.accepted_steps},
              {"rejected_steps", e.rejected_steps},
              {"node_failures", e.node_failures}};
}

json arc_checks(const Scenario& sc, const std::filesystem::path& out_dir, Recorder& rec) {
  const ArcSpec& spec_arc = *sc.arc;
  const Tolerances& tol = sc.tolerances;
  const MomentumWavefunction phi_base = build_state(spec_arc.phi, sc.units, sc.arrival_point);
  const MomentumWavefunction psi_base = build_state(spec_arc.psi, sc.units, sc.arrival_point);
  const ArcPair pair = construct_arc_pair(phi_base, psi_base, make_time_grid(spec_arc.pair_time_grid), spec_arc.pair);

  const Arc arc = bohm_arc(pair.phi, pair.psi, make_time_grid(spec_arc.scan_time_grid), tol.gap.cutoff_relative);
  const SuperpositionScan s = scan(arc, spec_arc.scan_points);
  const SinusoidFit fit = arc_fit(arc, s, spec_arc.nodes_per_piece);
  const SinusoidFit sample_fit = sinusoid_fit(s);
  const ViolationReport v = violation_report(s, fit, tol.violation);

  const Arc control_arc = form_arc(q0_form(), pair.phi, pair.psi);
  const SuperpositionScan control = scan(control_arc, spec_arc.scan_points);
  const SinusoidFit control_fit = sinusoid_fit(control);

  const double unit = std::max(std::abs(pair.phi.norm() - 1.0), std::abs(pair.psi.norm() - 1.0));
  rec.add("pair_unit_norm", unit < 1e-12, unit, 1e-12);
  rec.add("pair_phi_positive", s.beta[0] > tol.violation.positive, s.beta[0], tol.violation.positive,
          "B of phi at t = 0");
  rec.add("pair_psi_backflow", pair.psi_current < -tol.backflow_depth, pair.psi_current, -tol.backflow_depth,
          "J of psi at t = 0");
  const double b_psi = s.beta[s.beta.size() - 1];
  rec.add("pair_psi_cut", b_psi == 0.0, b_psi, 0.0, "B of psi at t = 0");
  rec.add("quadratic_form_violated", v.violated, v.residual_rel, tol.violation.residual,
          v.violated ? "all three witnesses hold" : "failed: " + v.failed);
  rec.add("q0_control_fit", control_fit.residual_rel < tol.q0_control, control_fit.residual_rel, tol.q0_control);

  if (sc.outputs.scan && !out_dir.empty()) {
    std::ofstream csv(out_dir / "scan.csv", std::ios::binary);
    csv << "xi,beta,fit,residual,branch,q0,q0_fit\n";
    for (Eigen::Index i = 0; i < s.xi.size(); ++i)
      csv << format_number(s.xi[i]) << ',' << format_number(s.beta[i]) << ',' << format_number(fit.fitted[i]) << ','
          << format_number(s.beta[i] - fit.fitted[i]) << ',' << s.branch[i] << ',' << format_number(control.beta[i])
          << ',' << format_number(control_fit.fitted[i]) << '\n';
  }

  auto fit_json = [](const SinusoidFit& f) {
    return json{{"a", f.a},
                {"b", f.b},
                {"c", f.c},
                {"residual_rel", f.residual_rel},
                {"normal_residual", f.normal_residual},
                {"norm", f.norm == FitNorm::arc ? "arc" : "samples"}};
  };
  json fit_j = fit_json(fit);
  fit_j["branch_switches"] = fit.switches;
  return json{
      {"pair",
       {{"phi_label", pair.phi.label()},
        {"psi_label", pair.psi.label()},
        {"phi_time_shift", pair.phi_time_shift},
        {"psi_time_shift", pair.psi_time_shift},
        {"phase", pair.phase},
        {"overlap", complex_json(pair.overlap)},
        {"phi_current", pair.phi_current},
        {"psi_current", pair.psi_current}}},
      {"scan", {{"points", spec_arc.scan_points}, {"time_grid", grid_json(make_time_grid(spec_arc.scan_time_grid))}}},
      {"fit", fit_j},
      {"fit_on_samples", fit_json(sample_fit)},
      {"verdict",
       {{"violated", v.violated},
        {"beta0", v.beta0},
        {"plateau_start", v.plateau_start ? json(*v.plateau_start) : json(nullptr)},
        {"plateau_fraction", v.plateau_fraction},
        {"residual_rel", v.residual_rel},
        {"positive_witness", v.positive_witness},
        {"plateau_witness", v.plateau_witness},
        {"misfit_witness", v.misfit_witness},
        {"failed", v.failed}}},
      {"control", {{"form", control.quantity}, {"fit", fit_json(control_fit)}}}};
}

void write_series(const Pipeline& p, const std::filesystem::path& path) {
  std::ofstream csv(path, std::ios::binary);
  csv << "t,J,f,P,B\n";
  for (Eigen::Index i = 0; i < p.grid.size(); ++i)
    csv << format_number(p.grid[i]) << ',' << format_number(p.J[i]) << ',' << format_number(p.f[i]) << ','
        << format_number(p.detection.P[i]) << ',' << format_number(p.bohm.B[i]) << '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorKind::config, "cannot write " + path.string());
}

void dump(std::string& out, const json& v, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(it.key()).dump() + ": ";
        dump(out, it.value(), depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        dump(out, v[i], depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case json::value_t::number_float: {
      const double d = v.get<double>();
      out += std::isfinite(d) ? format_number(d) : "null";
      return;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

std::string format_json(const json& value) {
  std::string out;
  dump(out, value, 0);
  out += "\n";
  return out;
}

RunSummary run_scenario(const Scenario& sc, const std::filesystem::path& out_dir,
                        std::optional<std::uint64_t> seed_override) {
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  Recorder rec;
  json report;
  report["schema_version"] = kSchemaVersion;
  report["defaults_version"] = kDefaultsVersion;
  report["scenario"] = sc.name;
  report["units"] = json{{"hbar", sc.units.hbar}, {"mass", sc.units.mass}};
  report["arrival_point"] = sc.arrival_point;
  json checks_requested = json::array();
  for (const Check c : sc.checks) checks_requested.push_back(std::string(to_string(c)));
  report["checks_requested"] = checks_requested;

  const Tolerances& tol = sc.tolerances;
  std::optional<Pipeline> pipe;
  if (sc.state && sc.time_grid)
    pipe.emplace(build_state(*sc.state, sc.units, sc.arrival_point), make_time_grid(*sc.time_grid),
                 tol.gap.cutoff_relative);
  if (pipe) {
    report["state"] = json{{"label", pipe->phi.label()},
                           {"k_grid", grid_json(pipe->phi.grid())},
                           {"components", sc.state->components.size()},
                           {"parity", sc.state->parity},
                           {"time_grid", grid_json(pipe->grid)}};
  }

  if (sc.checks.count(Check::wavepacket)) {
    const XGrid x_grid = make_x_grid(*sc.x_grid);
    json wp = json::array();
    if (pipe) wp.push_back(wavepacket_checks(pipe->phi, *sc.state, pipe->grid, x_grid, sc.localization, tol, rec, ""));
    if (sc.arc) {
      const TimeGrid grid = make_time_grid(sc.arc->pair_time_grid);
      for (const auto* spec : {&sc.arc->phi, &sc.arc->psi})
        wp.push_back(wavepacket_checks(build_state(*spec, sc.units, sc.arrival_point), *spec, grid, x_grid,
                                       std::nullopt, tol, rec, spec->label + ":"));
    }
    report["wavepacket"] = wp;
  }
  if (sc.checks.count(Check::current)) report["current"] = current_checks(*pipe, make_x_grid(*sc.x_grid), tol, rec);
  if (sc.checks.count(Check::kijowski)) report["kijowski"] = kijowski_checks(*pipe, tol, rec);
  if (sc.checks.count(Check::bohm)) report["gap_report"] = bohm_checks(*pipe, sc, rec);
  if (sc.checks.count(Check::mirror)) report["mirror"] = mirror_checks(*pipe, sc, rec);
  if (sc.checks.count(Check::montecarlo)) {
    const std::uint64_t seed = seed_override.value_or(sc.montecarlo->seed);
    const XGrid x_grid = make_x_grid(sc.montecarlo->x_grid.value_or(*sc.x_grid));
    report["montecarlo"] = montecarlo_checks(*pipe, sc, seed, x_grid, out_dir, rec);
  }
  if (sc.checks.count(Check::arc)) report["arc"] = arc_checks(sc, out_dir, rec);

  if (sc.outputs.series && pipe && !out_dir.empty()) write_series(*pipe, out_dir / "series.csv");

  RunSummary summary;
  summary.scenario = sc.name;
  summary.checks = rec.checks();
  summary.passed = std::all_of(summary.checks.begin(), summary.checks.end(), [](const auto& c) { return c.passed; });
  json checks = json::array();
  for (const auto& c : summary.checks) {
    json item{{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"limit", c.limit}};
    if (!c.detail.empty()) item["detail"] = c.detail;
    checks.push_back(item);
  }
  report["checks"] = checks;
  report["passed"] = summary.passed;
  summary.report = report;
  if (!out_dir.empty()) write_text(out_dir / "summary.json", format_json(report));
  return summary;
}

}  // namespace arrival::scenario
