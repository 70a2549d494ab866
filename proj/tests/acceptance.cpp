// End-to-end acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "support.hpp"

#include "arrival/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

using namespace arrival;
namespace sc = arrival::scenario;
using nlohmann::ordered_json;

namespace {

// Every tolerance used below, in one place.
namespace tol {
constexpr double unitarity = 1e-14;
constexpr double parseval = 1e-8;
constexpr double flux_agreement = 1e-6;
constexpr double flux_range = 1e-8;
constexpr double final_flux = 1e-6;
constexpr double factorized_current = 1e-10;
constexpr Eigen::Index max_direct_nodes = 256;
constexpr double kijowski_norm = 1e-6;
constexpr double mean_agreement = 1e-6;
constexpr double gap_equality = 1e-8;
constexpr double pointwise = 1e-12;
constexpr double backflow_depth = 1e-4;
constexpr double gap_identity = 1e-6;
constexpr double mirror = 1e-6;
constexpr double monte_carlo_sigmas = 4.0;
constexpr std::size_t checkpoints = 10;
constexpr double beta0 = 1e-3;
constexpr double plateau_fraction = 0.2;
constexpr double misfit = 0.02;
constexpr double control_fit = 1e-8;
constexpr double convergence = 1e-6;
}  // namespace tol

int failures = 0;

void verdict(int id, bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  failures += !ok;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const sc::CheckResult* find_check(const sc::RunSummary& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return &c;
  return nullptr;
}

// All named checks present and passed; absent names are appended to `missing`.
bool checks_pass(const sc::RunSummary& r, std::initializer_list<const char*> names, std::string& missing) {
  bool ok = true;
  for (const char* n : names) {
    const auto* c = find_check(r, n);
    if (!c) missing += std::string(" missing:") + r.scenario + "/" + n;
    ok = ok && c && c->passed;
  }
  return ok;
}

double value_of(const sc::RunSummary& r, const char* name) {
  const auto* c = find_check(r, name);
  return c ? c->value : std::nan("");
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// A state together with the time grid it is judged on.
struct JudgedState {
  std::string where;
  MomentumWavefunction phi;
  TimeGrid grid;
  std::optional<XGrid> x_grid;
};

std::vector<JudgedState> bundled_states(const std::vector<sc::Scenario>& all) {
  std::vector<JudgedState> out;
  auto tgrid = [](const sc::GridSpec& g) { return TimeGrid(g.min, g.max, g.n); };
  std::optional<XGrid> xg;
  for (const auto& s : all) {
    xg.reset();
    if (s.x_grid) xg = XGrid(s.x_grid->min, s.x_grid->max, s.x_grid->n);
    if (s.state)
      out.push_back({s.name + "/" + s.state->label, sc::build_state(*s.state, s.units, s.arrival_point),
                     tgrid(*s.time_grid), xg});
    if (s.arc) {
      const auto& spec_arc = *s.arc;
      const auto phi = sc::build_state(spec_arc.phi, s.units, s.arrival_point);
      const auto psi = sc::build_state(spec_arc.psi, s.units, s.arrival_point);
      const auto pair = construct_arc_pair(phi, psi, tgrid(spec_arc.pair_time_grid), spec_arc.pair);
      out.push_back({s.name + "/phi", pair.phi, tgrid(spec_arc.scan_time_grid), xg});
      out.push_back({s.name + "/psi", pair.psi, tgrid(spec_arc.scan_time_grid), xg});
    }
  }
  return out;
}

// Reported moments and residuals, read back from a summary.
std::map<std::string, double> reported_quantities(const ordered_json& j) {
  std::map<std::string, double> q;
  if (j.contains("kijowski")) {
    q["t_mean_current"] = j["kijowski"]["t_mean_current"];
    q["t_mean_q0"] = j["kijowski"]["t_mean_q0"];
    q["variance_q0"] = j["kijowski"]["variance_q0"];
  }
  if (j.contains("gap_report")) {
    q["t_mean_K"] = j["gap_report"]["t_mean_K"];
    q["t_mean_B"] = j["gap_report"]["t_mean_B"];
    q["bohm_variance"] = j["gap_report"]["bohm_variance"];
  }
  if (j.contains("arc")) {
    q["residual_rel"] = j["arc"]["fit"]["residual_rel"];
  }
  return q;
}

}  // namespace

int main() {
  const auto root = std::filesystem::temp_directory_path() / "arrival-acceptance";
  std::filesystem::remove_all(root);

  std::vector<sc::Scenario> scenarios;
  for (const auto& name : sc::list_scenarios()) scenarios.push_back(sc::load_scenario(name));

  std::map<std::string, sc::RunSummary> runs;
  for (const auto& s : scenarios) runs.emplace(s.name, sc::run_scenario(s, root / "first" / s.name));
  const auto states = bundled_states(scenarios);

  // 1. unitarity and Parseval on every bundled state
  {
    double drift = 0.0, parseval = 0.0;
    for (const auto& st : states) {
      const double n0 = st.phi.norm_squared();
      for (int i = 0; i <= 8; ++i) {
        const double t = st.grid.min() + (st.grid.max() - st.grid.min()) * i / 8.0;
        drift = std::max(drift, std::abs(evolve(st.phi, t).norm_squared() - n0));
      }
      if (!st.x_grid) continue;
      // the moment of peak current: the packet straddles the origin
      const auto J = current_series(st.phi, st.grid);
      Eigen::Index peak;
      J.values.abs().maxCoeff(&peak);
      const double t = st.grid[peak];
      parseval = std::max(parseval, std::abs(to_position(evolve(st.phi, t), *st.x_grid, t).norm_squared() - n0));
    }
    verdict(1, drift < tol::unitarity && parseval < tol::parseval, "unitarity and Parseval",
            "max norm drift " + num(drift) + ", max k/x norm difference " + num(parseval) + " over " +
                std::to_string(states.size()) + " states");
  }

  // 2. flux from the time integral against flux from positions
  {
    bool ok = true;
    double worst = 0.0;
    std::string missing;
    int judged = 0;
    for (const auto& [name, r] : runs) {
      if (!find_check(r, "flux_cross_check")) continue;
      ++judged;
      ok = checks_pass(r, {"flux_cross_check", "flux_range", "final_flux"}, missing) && ok;
      worst = std::max(worst, value_of(r, "flux_cross_check"));
    }
    verdict(2, ok && judged >= 3 && missing.empty() && worst < tol::flux_agreement, "flux cross-check",
            "largest f difference " + num(worst) + " (limit " + num(tol::flux_agreement) + ") in " +
                std::to_string(judged) + " scenarios, range " + num(tol::flux_range) + ", final " +
                num(tol::final_flux) + missing);
  }

  // 3. factorized current against the double integral, random states
  {
    testing_support::Rng rng(20240601);
    double worst = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
      const Eigen::Index n = rng.integer(16, static_cast<int>(tol::max_direct_nodes));
      const double lo = rng.uniform(0.05, 4.0);
      const auto phi = testing_support::random_amplitudes(rng, n, lo, lo + rng.uniform(0.5, 8.0));
      const double t = rng.uniform(-10.0, 10.0);
      worst = std::max(worst, std::abs(current_at_origin(phi, t) - current_at_origin_direct(phi, t)));
    }
    verdict(3, worst < tol::factorized_current, "factorized current",
            "largest difference " + num(worst) + " over 60 random states with n_k <= 256");
  }

  // 4 and 5. q0 axioms and the first-moment identity on every right-mover state
  {
    bool axioms = true;
    double norm = 0.0, mean = 0.0;
    int judged = 0;
    std::string failed;
    for (const auto& st : states) {
      if (!st.phi.is_right_mover()) continue;
      ++judged;
      const auto rep = axiom_check(q0_form(), st.phi, st.grid);
      if (!rep.all_passed()) failed += " " + st.where;
      axioms = axioms && rep.all_passed();
      norm = std::max(norm, std::abs(rep.normalization.value));
      const double mj = mean_from_current(current_series(st.phi, st.grid));
      const double mq = moments(density_series(q0_form(), st.phi, st.grid)).mean;
      mean = std::max(mean, std::abs(mj - mq));
    }
    verdict(4, axioms && norm < tol::kijowski_norm, "Kijowski axioms",
            "all four axioms on " + std::to_string(judged) + " states, largest |int q0 - 1| " + num(norm) + failed);
    verdict(5, mean < tol::mean_agreement, "first moments of J and q0",
            "largest difference " + num(mean) + " over " + std::to_string(judged) + " states");
  }

  // 6. equality branch
  {
    const auto& r = runs.at("gaussian-no-backflow");
    std::string missing;
    const bool ok = checks_pass(r, {"gap_equality", "bohm_equals_current", "no_backflow"}, missing);
    const double gap = value_of(r, "gap_equality"), pw = value_of(r, "bohm_equals_current");
    verdict(6, ok && gap < tol::gap_equality && pw < tol::pointwise, "equality without backflow",
            "|gap| " + num(gap) + ", max |B - J| " + num(pw) + missing);
  }

  // 7. strict branch
  {
    const auto& r = runs.at("two-gaussian-backflow");
    std::string missing;
    const bool ok = checks_pass(r, {"backflow_depth", "gap_positive", "gap_identity", "bohm_pointwise"}, missing);
    const auto& g = r.report["gap_report"];
    const double depth = g["min_current"], gap = g["gap"], by_f = g["gap_by_F_integral"];
    verdict(7,
            ok && depth < -tol::backflow_depth && gap > 0.0 && std::abs(gap - by_f) < tol::gap_identity,
            "strict inequality with backflow",
            "min J " + num(depth) + ", gap " + num(gap) + ", |gap - by-parts| " + num(std::abs(gap - by_f)) +
                missing);
  }

  // 8. mirror
  {
    const auto& r = runs.at("mirror-left-mover");
    std::string missing;
    const bool ok = checks_pass(r, {"mirror_gap_size", "mirror_order"}, missing);
    const double size = value_of(r, "mirror_gap_size"), order = value_of(r, "mirror_order");
    verdict(8, ok && size < tol::mirror && order <= 0.0, "mirror state",
            "t_mean_K - t_mean_B " + num(order) + ", | |gap| - |gap_mirror| | " + num(size) + missing);
  }

  // 9. Monte Carlo
  {
    const auto& r = runs.at("montecarlo-oracle");
    std::string missing;
    const bool ok = checks_pass(r, {"montecarlo_agreement", "trajectory_order"}, missing);
    const auto& mc = r.report["montecarlo"];
    const double worst = mc["max_deviation_sigma"];
    const std::size_t n = mc["checkpoints"].size(), violations = mc["order_violations"];
    verdict(9, ok && worst <= tol::monte_carlo_sigmas && n == tol::checkpoints && violations == 0,
            "Monte Carlo oracle",
            "worst deviation " + num(worst) + " standard errors at " + std::to_string(n) + " checkpoints, N " +
                mc["N"].dump() + ", seed " + mc["seed"].dump() + ", order violations " +
                std::to_string(violations) + missing);
  }

  // 10. superposition scan of the Bohmian density
  {
    const auto& spec_arc = runs.at("superposition-arc").report["arc"];
    const auto& v = spec_arc["verdict"];
    const double beta0 = v["beta0"], frac = v["plateau_fraction"], res = v["residual_rel"];
    const double control = spec_arc["control"]["fit"]["residual_rel"];
    const bool plateau = !v["plateau_start"].is_null() && frac >= tol::plateau_fraction;
    verdict(10,
            v["violated"] == true && beta0 > tol::beta0 && plateau && res > tol::misfit && control < tol::control_fit,
            "not a quadratic form",
            "beta(0) " + num(beta0) + ", trailing zero plateau " + num(frac) + " of [0, pi/2], residual_rel " +
                num(res) + ", q0 control residual_rel " + num(control));
  }

  // 11. convergence under doubling of n_k, n_t and M
  {
    double worst = 0.0, gap_change = 0.0;
    std::string where;
    auto compare = [&](const std::string& label, const ordered_json& base, const ordered_json& doubled) {
      const auto a = reported_quantities(base), b = reported_quantities(doubled);
      for (const auto& [key, va] : a) {
        const double rel = std::abs(b.at(key) - va) / std::abs(va);
        if (rel > worst) {
          worst = rel;
          where = label + " " + key;
        }
      }
      // the gap is a small difference of two moments; reported in absolute terms
      if (base.contains("gap_report"))
        gap_change = std::max(gap_change, std::abs(double(doubled["gap_report"]["gap"]) -
                                                   double(base["gap_report"]["gap"])));
    };
    auto refine = [](sc::GridSpec& g) { g.n = 2 * g.n - 1; };
    for (const auto& s : scenarios) {
      if (s.montecarlo) continue;  // governed by criterion 9
      sc::Scenario base = s;
      base.checks.clear();
      if (s.checks.count(sc::Check::kijowski)) base.checks.insert(sc::Check::kijowski);
      if (s.checks.count(sc::Check::bohm)) base.checks.insert(sc::Check::bohm);
      if (s.checks.count(sc::Check::arc)) base.checks.insert(sc::Check::arc);
      base.outputs = {};
      const auto ref = sc::run_scenario(base, {}).report;

      sc::Scenario nk = base;
      if (nk.state) nk.state->k_grid->n *= 2;
      if (nk.arc) {
        nk.arc->phi.k_grid->n *= 2;
        nk.arc->psi.k_grid->n *= 2;
      }
      compare(s.name + " (2 n_k)", ref, sc::run_scenario(nk, {}).report);

      sc::Scenario nt = base;
      if (nt.time_grid) refine(*nt.time_grid);
      if (nt.arc) refine(nt.arc->scan_time_grid);
      compare(s.name + " (2 n_t)", ref, sc::run_scenario(nt, {}).report);

      if (base.arc) {
        sc::Scenario m = base;
        m.arc->scan_points = 2 * m.arc->scan_points - 1;
        compare(s.name + " (2 M)", ref, sc::run_scenario(m, {}).report);
      }
    }
    verdict(11, worst < tol::convergence, "convergence",
            "largest relative change of a moment or residual " + num(worst) + " (" + where +
                "); largest absolute change of a gap " + num(gap_change));
  }

  // 12. determinism
  {
    bool same = true;
    std::string differs;
    for (const auto& s : scenarios) {
      const auto second = root / "second" / s.name;
      sc::run_scenario(s, second);
      const bool eq = read_file(root / "first" / s.name / "summary.json") == read_file(second / "summary.json");
      if (!eq) differs += " " + s.name;
      same = same && eq;
    }
    verdict(12, same, "determinism",
            same ? "byte-identical summary.json for all " + std::to_string(scenarios.size()) + " scenarios"
                 : "summaries differ:" + differs);
  }

  std::filesystem::remove_all(root);
  return failures == 0 ? 0 : 1;
}
