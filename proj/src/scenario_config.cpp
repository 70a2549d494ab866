#include "arrival/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <set>
#include <sstream>

namespace arrival::scenario {

namespace {

// name/text pairs generated from scenarios/*.yaml at configure time
const std::vector<BundledScenario> kBundled = [] {
  std::vector<BundledScenario> v{
#include "bundled_scenarios.inc"
  };
  std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
  return v;
}();

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& path, const std::string& what) const {
    std::ostringstream msg;
    msg << source_;
    if (node.IsDefined() && node.Mark().line >= 0)
      msg << ":" << node.Mark().line + 1 << ":" << node.Mark().column + 1;
    msg << ": " << (path.empty() ? "" : "'" + path + "': ") << what;
    throw Error(ErrorKind::config, msg.str());
  }

  void expect_map(const YAML::Node& node, const std::string& path,
                  std::initializer_list<std::string_view> allowed) const {
    if (!node.IsMap()) fail(node, path, "expected a mapping");
    std::set<std::string> seen;
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
        fail(kv.first, path, "unknown field '" + key + "'");
      if (!seen.insert(key).second) fail(kv.first, path, "duplicate field '" + key + "'");
    }
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& path) const {
    if (!node.IsScalar()) fail(node, path, "expected a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, path, "cannot read '" + node.Scalar() + "' as " + type_name<T>());
    }
  }

  template <class T>
  T get(const YAML::Node& map, const std::string& key, const std::string& path) const {
    const YAML::Node node = map[key];
    if (!node) fail(map, path, "missing field '" + key + "'");
    return scalar<T>(node, join(path, key));
  }

  template <class T>
  T get_or(const YAML::Node& map, const std::string& key, const std::string& path, T fallback) const {
    const YAML::Node node = map[key];
    return node ? scalar<T>(node, join(path, key)) : fallback;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  template <class T>
  static std::string type_name() {
    if constexpr (std::is_same_v<T, bool>) return "a boolean";
    else if constexpr (std::is_integral_v<T>) return "an integer";
    else if constexpr (std::is_floating_point_v<T>) return "a number";
    else return "text";
  }

  std::string source_;
};

GridSpec read_grid(const Reader& r, const YAML::Node& node, const std::string& path,
                   std::optional<Eigen::Index> default_n) {
  r.expect_map(node, path, {"min", "max", "n"});
  GridSpec g;
  g.min = r.get<double>(node, "min", path);
  g.max = r.get<double>(node, "max", path);
  g.n = default_n ? r.get_or<Eigen::Index>(node, "n", path, *default_n) : r.get<Eigen::Index>(node, "n", path);
  if (!(g.min < g.max)) r.fail(node, path, "min must be below max");
  return g;
}

complex read_weight(const Reader& r, const YAML::Node& node, const std::string& path) {
  if (node.IsScalar()) return {r.scalar<double>(node, path), 0.0};
  if (node.IsSequence()) {
    if (node.size() != 2) r.fail(node, path, "a weight list must be [re, im]");
    return {r.scalar<double>(node[0], path), r.scalar<double>(node[1], path)};
  }
  if (node.IsMap()) {
    if (node["abs"] || node["arg"]) {
      r.expect_map(node, path, {"abs", "arg"});
      return std::polar(r.get<double>(node, "abs", path), r.get_or<double>(node, "arg", path, 0.0));
    }
    r.expect_map(node, path, {"re", "im"});
    return {r.get_or<double>(node, "re", path, 0.0), r.get_or<double>(node, "im", path, 0.0)};
  }
  r.fail(node, path, "a weight is a number, [re, im], {re, im} or {abs, arg}");
}

StateSpec read_state(const Reader& r, const YAML::Node& node, const std::string& path) {
  r.expect_map(node, path, {"label", "components", "k_grid", "parity"});
  StateSpec s;
  s.label = r.get_or<std::string>(node, "label", path, "state");
  const YAML::Node comps = node["components"];
  if (!comps || !comps.IsSequence() || comps.size() == 0)
    r.fail(comps ? comps : node, Reader::join(path, "components"), "expected a non-empty list");
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string p = Reader::join(path, "components[" + std::to_string(i) + "]");
    const YAML::Node c = comps[i];
    r.expect_map(c, p, {"weight", "k0", "sigma_k", "x0"});
    GaussianComponent g;
    g.weight = c["weight"] ? read_weight(r, c["weight"], Reader::join(p, "weight")) : complex{1.0, 0.0};
    g.k0 = r.get<double>(c, "k0", p);
    g.sigma_k = r.get<double>(c, "sigma_k", p);
    g.x0 = r.get_or<double>(c, "x0", p, 0.0);
    if (!(g.sigma_k > 0.0)) r.fail(c["sigma_k"], Reader::join(p, "sigma_k"), "must be positive");
    s.components.push_back(g);
  }
  if (node["k_grid"]) s.k_grid = read_grid(r, node["k_grid"], Reader::join(path, "k_grid"), Defaults{}.n_k);
  s.parity = r.get_or<bool>(node, "parity", path, false);
  return s;
}

Check read_check(const Reader& r, const YAML::Node& node) {
  const auto name = r.scalar<std::string>(node, "checks");
  for (const Check c : {Check::wavepacket, Check::current, Check::kijowski, Check::bohm, Check::mirror,
                        Check::montecarlo, Check::arc})
    if (to_string(c) == name) return c;
  r.fail(node, "checks", "unknown check '" + name + "'");
}

void read_tolerances(const Reader& r, const YAML::Node& node, Tolerances& t) {
  const std::string p = "tolerances";
  r.expect_map(node, p,
               {"unitarity", "parseval", "localization", "flux_agreement", "flux_range", "final_flux",
                "kijowski_norm", "mean_agreement", "gap_equality", "pointwise", "gap_identity",
                "backflow_depth", "mirror", "monte_carlo_sigmas", "q0_control", "cutoff_relative",
                "gap_sign", "backflow_threshold", "beta_positive", "plateau_fraction",
                "zero_relative", "sinusoid_residual"});
  auto set = [&](const char* key, double& field) { field = r.get_or<double>(node, key, p, field); };
  set("unitarity", t.unitarity);
  set("parseval", t.parseval);
  set("localization", t.localization);
  set("flux_agreement", t.flux_agreement);
  set("flux_range", t.flux_range);
  set("final_flux", t.final_flux);
  set("kijowski_norm", t.kijowski_norm);
  t.axioms.normalization = t.kijowski_norm;
  set("mean_agreement", t.mean_agreement);
  set("gap_equality", t.gap_equality);
  set("pointwise", t.pointwise);
  set("gap_identity", t.gap_identity);
  set("backflow_depth", t.backflow_depth);
  set("mirror", t.mirror);
  set("monte_carlo_sigmas", t.monte_carlo_sigmas);
  set("q0_control", t.q0_control);
  set("cutoff_relative", t.gap.cutoff_relative);
  set("gap_sign", t.gap.gap);
  set("backflow_threshold", t.gap.backflow_threshold);
  set("beta_positive", t.violation.positive);
  set("plateau_fraction", t.violation.plateau_fraction);
  set("zero_relative", t.violation.zero_relative);
  set("sinusoid_residual", t.violation.residual);
}

MonteCarloSpec read_montecarlo(const Reader& r, const YAML::Node& node) {
  const std::string p = "montecarlo";
  r.expect_map(node, p, {"trajectories", "seed", "levels", "x_grid", "rtol", "atol", "max_step_cells",
                         "epsilon_relative", "max_node_failure_fraction"});
  MonteCarloSpec m;
  m.trajectories = r.get_or<std::size_t>(node, "trajectories", p, m.trajectories);
  m.seed = r.get_or<std::uint64_t>(node, "seed", p, m.seed);
  if (const YAML::Node lv = node["levels"]) {
    if (!lv.IsSequence()) r.fail(lv, "montecarlo.levels", "expected a list");
    for (const auto& l : lv) {
      const double v = r.scalar<double>(l, "montecarlo.levels");
      if (!(v > 0.0 && v < 1.0)) r.fail(l, "montecarlo.levels", "levels lie strictly between 0 and 1");
      m.levels.push_back(v);
    }
  } else {
    for (int i = 0; i < 10; ++i) m.levels.push_back(0.05 + 0.1 * i);
  }
  if (node["x_grid"]) m.x_grid = read_grid(r, node["x_grid"], "montecarlo.x_grid", Defaults{}.n_x);
  m.control.rtol = r.get_or<double>(node, "rtol", p, m.control.rtol);
  m.control.atol = r.get_or<double>(node, "atol", p, m.control.atol);
  m.control.max_step_cells = r.get_or<double>(node, "max_step_cells", p, m.control.max_step_cells);
  m.control.epsilon_relative = r.get_or<double>(node, "epsilon_relative", p, m.control.epsilon_relative);
  m.control.max_node_failure_fraction =
      r.get_or<double>(node, "max_node_failure_fraction", p, m.control.max_node_failure_fraction);
  if (m.trajectories < 100) r.fail(node["trajectories"], "montecarlo.trajectories", "need at least 100");
  return m;
}

ArcSpec read_arc(const Reader& r, const YAML::Node& node) {
  const std::string p = "arc";
  r.expect_map(node, p, {"phi", "psi", "pair_time_grid", "scan_time_grid", "scan_points",
                         "phi_current_fraction", "backflow_threshold", "nodes_per_piece"});
  ArcSpec t;
  if (!node["phi"] || !node["psi"]) r.fail(node, p, "needs both 'phi' and 'psi'");
  t.phi = read_state(r, node["phi"], "arc.phi");
  t.psi = read_state(r, node["psi"], "arc.psi");
  if (!node["pair_time_grid"] || !node["scan_time_grid"])
    r.fail(node, p, "needs 'pair_time_grid' and 'scan_time_grid'");
  t.pair_time_grid = read_grid(r, node["pair_time_grid"], "arc.pair_time_grid", Defaults{}.n_t);
  t.scan_time_grid = read_grid(r, node["scan_time_grid"], "arc.scan_time_grid", Defaults{}.n_t);
  t.scan_points = r.get_or<Eigen::Index>(node, "scan_points", p, t.scan_points);
  t.pair.phi_current_fraction = r.get_or<double>(node, "phi_current_fraction", p, t.pair.phi_current_fraction);
  t.pair.backflow_threshold = r.get_or<double>(node, "backflow_threshold", p, t.pair.backflow_threshold);
  t.nodes_per_piece = r.get_or<int>(node, "nodes_per_piece", p, t.nodes_per_piece);
  if (t.scan_points < 33) r.fail(node["scan_points"], "arc.scan_points", "need at least 33");
  if (t.nodes_per_piece < 2) r.fail(node["nodes_per_piece"], "arc.nodes_per_piece", "need at least 2");
  return t;
}

// Grid sizes and the like are checked here so that a bad file fails before any work starts.
void validate(const Reader& r, const YAML::Node& root, const Scenario& s) {
  auto need = [&](bool ok, const std::string& what) {
    if (!ok) r.fail(root, "", what);
  };
  auto grid_ok = [&](const std::optional<GridSpec>& g, Eigen::Index min_n, const std::string& name) {
    if (g && g->n < min_n) r.fail(root[name], name, "needs at least " + std::to_string(min_n) + " points");
  };
  grid_ok(s.time_grid, 64, "time_grid");
  grid_ok(s.x_grid, 4, "x_grid");
  if (s.state && s.state->k_grid && s.state->k_grid->n < 16) r.fail(root["state"], "state.k_grid", "needs at least 16 points");

  const bool needs_state = s.checks.count(Check::current) || s.checks.count(Check::kijowski) ||
                           s.checks.count(Check::bohm) || s.checks.count(Check::mirror) ||
                           s.checks.count(Check::montecarlo);
  need(!needs_state || s.state.has_value(), "the requested checks need a 'state'");
  need(!needs_state || s.time_grid.has_value(), "the requested checks need a 'time_grid'");
  need(!s.checks.count(Check::wavepacket) || s.state || s.arc, "'wavepacket' needs a state");
  need(!s.checks.count(Check::wavepacket) || s.x_grid, "'wavepacket' needs an 'x_grid'");
  need(!s.checks.count(Check::wavepacket) || s.time_grid || s.arc, "'wavepacket' needs a 'time_grid'");
  need(!s.checks.count(Check::current) || s.x_grid, "'current' needs an 'x_grid'");
  need(!s.checks.count(Check::montecarlo) || s.montecarlo, "'montecarlo' needs a 'montecarlo' section");
  need(!s.checks.count(Check::montecarlo) || !s.montecarlo || s.montecarlo->x_grid || s.x_grid,
       "'montecarlo' needs an x grid for the initial positions");
  need(!s.checks.count(Check::arc) || s.arc, "'arc' needs a 'arc' section");
  need(!s.checks.count(Check::mirror) || (s.state && s.state->parity),
       "'mirror' compares a parity-transformed state with its original; set state.parity");
  need(!s.outputs.trajectories || s.checks.count(Check::montecarlo), "trajectory output needs 'montecarlo'");
  need(!s.outputs.scan || s.checks.count(Check::arc), "scan output needs 'arc'");
  need(!s.outputs.series || s.state.has_value(), "series output needs a 'state'");
}

}  // namespace

std::string_view to_string(Check c) {
  switch (c) {
    case Check::wavepacket: return "wavepacket";
    case Check::current: return "current";
    case Check::kijowski: return "kijowski";
    case Check::bohm: return "bohm";
    case Check::mirror: return "mirror";
    case Check::montecarlo: return "montecarlo";
    case Check::arc: return "arc";
  }
  return "?";
}

Scenario parse_scenario(const std::string& text, const std::string& source) {
  const Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw Error(ErrorKind::config, source + ":" + std::to_string(e.mark.line + 1) + ":" +
                                       std::to_string(e.mark.column + 1) + ": " + e.msg);
  }
  if (!root.IsMap()) throw Error(ErrorKind::config, source + ": expected a mapping at the top level");
  r.expect_map(root, "",
               {"schema_version", "name", "description", "units", "arrival_point", "state", "time_grid",
                "x_grid", "wavepacket", "checks", "expect", "tolerances", "montecarlo", "arc",
                "outputs"});

  Scenario s;
  s.source = source;
  const int version = r.get<int>(root, "schema_version", "");
  if (version != kSchemaVersion)
    r.fail(root["schema_version"], "schema_version", "unsupported version " + std::to_string(version));
  s.name = r.get<std::string>(root, "name", "");
  s.description = r.get_or<std::string>(root, "description", "", "");
  if (const YAML::Node u = root["units"]) {
    r.expect_map(u, "units", {"hbar", "mass"});
    s.units.hbar = r.get_or<double>(u, "hbar", "units", 1.0);
    s.units.mass = r.get_or<double>(u, "mass", "units", 1.0);
    if (!(s.units.hbar > 0.0 && s.units.mass > 0.0)) r.fail(u, "units", "hbar and mass must be positive");
  }
  s.arrival_point = r.get_or<double>(root, "arrival_point", "", 0.0);
  if (root["state"]) s.state = read_state(r, root["state"], "state");
  if (root["time_grid"]) s.time_grid = read_grid(r, root["time_grid"], "time_grid", Defaults{}.n_t);
  if (root["x_grid"]) s.x_grid = read_grid(r, root["x_grid"], "x_grid", Defaults{}.n_x);
  if (const YAML::Node w = root["wavepacket"]) {
    r.expect_map(w, "wavepacket", {"localization"});
    if (const YAML::Node loc = w["localization"]) {
      r.expect_map(loc, "wavepacket.localization", {"times", "x_grid"});
      LocalizationSpec l;
      const YAML::Node times = loc["times"];
      if (!times || !times.IsSequence() || times.size() < 2)
        r.fail(loc, "wavepacket.localization.times", "expected a list of at least two times");
      for (const auto& t : times) l.times.push_back(r.scalar<double>(t, "wavepacket.localization.times"));
      if (!std::is_sorted(l.times.begin(), l.times.end()))
        r.fail(times, "wavepacket.localization.times", "times must be ascending");
      if (!loc["x_grid"]) r.fail(loc, "wavepacket.localization", "missing field 'x_grid'");
      l.x_grid = read_grid(r, loc["x_grid"], "wavepacket.localization.x_grid", Defaults{}.n_x);
      s.localization = l;
    }
  }
  const YAML::Node checks = root["checks"];
  if (!checks || !checks.IsSequence() || checks.size() == 0)
    r.fail(checks ? checks : root, "checks", "expected a non-empty list");
  for (const auto& c : checks) s.checks.insert(read_check(r, c));
  if (const YAML::Node e = root["expect"]) {
    r.expect_map(e, "expect", {"backflow"});
    if (e["backflow"]) s.expect_backflow = r.scalar<bool>(e["backflow"], "expect.backflow");
  }
  if (const YAML::Node t = root["tolerances"]) read_tolerances(r, t, s.tolerances);
  if (const YAML::Node m = root["montecarlo"]) s.montecarlo = read_montecarlo(r, m);
  if (const YAML::Node t = root["arc"]) s.arc = read_arc(r, t);
  if (const YAML::Node o = root["outputs"]) {
    r.expect_map(o, "outputs", {"series", "trajectories", "scan"});
    s.outputs.series = r.get_or<bool>(o, "series", "outputs", false);
    s.outputs.trajectories = r.get_or<bool>(o, "trajectories", "outputs", false);
    s.outputs.scan = r.get_or<bool>(o, "scan", "outputs", false);
  }
  validate(r, root, s);
  return s;
}

const std::vector<BundledScenario>& bundled_scenarios() { return kBundled; }

std::vector<std::string> list_scenarios() {
  std::vector<std::string> names;
  for (const auto& b : kBundled) names.push_back(b.name);
  return names;
}

Scenario load_scenario(const std::string& path_or_name) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(path_or_name, ec)) {
    std::ifstream in(path_or_name, std::ios::binary);
    if (!in) throw Error(ErrorKind::config, path_or_name + ": cannot open file");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str(), path_or_name);
  }
  for (const auto& b : kBundled)
    if (b.name == path_or_name) return parse_scenario(b.text, "bundled:" + b.name);
  throw Error(ErrorKind::config, path_or_name + ": no such file or bundled scenario");
}

KGrid k_grid_for(const StateSpec& spec) {
  if (spec.k_grid) return KGrid(spec.k_grid->min, spec.k_grid->max, spec.k_grid->n);
  const Defaults d;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& c : spec.components) {
    lo = std::min(lo, c.k0 - d.k_span_sigmas * c.sigma_k);
    hi = std::max(hi, c.k0 + d.k_span_sigmas * c.sigma_k);
  }
  // keep the grid on k > 0 for packets that move right
  if (lo <= 0.0 && hi > 0.0) lo = hi / static_cast<double>(d.n_k);
  return KGrid(lo, hi, d.n_k);
}

MomentumWavefunction build_state(const StateSpec& spec, const Units& units, double arrival_point) {
  MomentumWavefunction phi =
      normalize(make_gaussian_superposition(units, k_grid_for(spec), spec.components, spec.label));
  if (spec.parity) phi = parity(phi);
  if (arrival_point != 0.0) phi = shift_arrival_point(phi, arrival_point);
  return phi.relabeled(spec.label);
}

std::string describe(const std::string& name) {
  for (const auto& b : kBundled) {
    if (b.name != name) continue;
    const Scenario s = parse_scenario(b.text, "bundled:" + b.name);
    std::ostringstream out;
    out << s.name << "\n\n" << s.description << "\n\nchecks:";
    for (const Check c : s.checks) out << " " << to_string(c);
    out << "\n\nconfiguration:\n\n" << b.text;
    if (!b.text.empty() && b.text.back() != '\n') out << "\n";
    return out.str();
  }
  throw Error(ErrorKind::config, "unknown scenario '" + name + "'; see 'list'");
}

}  // namespace arrival::scenario
