#pragma once

// Scenario files: parsing, execution and export.

#include "arrival/bohm.hpp"
#include "arrival/kijowski.hpp"
#include "arrival/quadform.hpp"
#include "arrival/trajectories.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace arrival::scenario {

/// Bumped whenever a default below changes value.
inline constexpr int kDefaultsVersion = 1;
inline constexpr int kSchemaVersion = 1;

struct Defaults {
  Eigen::Index n_k = 2048;
  Eigen::Index n_x = 4096;
  Eigen::Index n_t = 2000;
  double k_span_sigmas = 8.0;  ///< default k grid is [k0 - 8σ, k0 + 8σ] over all components
  Eigen::Index scan_points = 33;
  std::size_t trajectories = 10000;
  std::uint64_t seed = 12345;
};

struct GridSpec {
  double min = 0.0;
  double max = 0.0;
  Eigen::Index n = 0;
};

struct StateSpec {
  std::string label;
  std::vector<GaussianComponent> components;
  std::optional<GridSpec> k_grid;  ///< default derived from the components
  bool parity = false;
};

struct Tolerances {
  double unitarity = 1e-14;
  double parseval = 1e-8;
  double localization = 0.01;
  double flux_agreement = 1e-6;
  double flux_range = 1e-8;
  double final_flux = 1e-6;
  double kijowski_norm = 1e-6;
  double mean_agreement = 1e-6;
  double gap_equality = 1e-8;
  double pointwise = 1e-12;
  double gap_identity = 1e-6;
  double backflow_depth = 1e-4;
  double mirror = 1e-6;
  double monte_carlo_sigmas = 4.0;
  double q0_control = 1e-8;
  GapTolerances gap{};
  AxiomTolerances axioms{};
  ViolationTolerances violation{};
};

struct MonteCarloSpec {
  std::size_t trajectories = Defaults{}.trajectories;
  std::uint64_t seed = Defaults{}.seed;
  std::vector<double> levels;  ///< checkpoints are the first times P reaches these values
  std::optional<GridSpec> x_grid;
  StepControl control{};
};

struct ArcSpec {
  StateSpec phi;
  StateSpec psi;
  GridSpec pair_time_grid;
  GridSpec scan_time_grid;
  Eigen::Index scan_points = Defaults{}.scan_points;
  PairOptions pair{};
  int nodes_per_piece = 16;
};

struct LocalizationSpec {
  std::vector<double> times;
  GridSpec x_grid;
};

enum class Check { wavepacket, current, kijowski, bohm, mirror, montecarlo, arc };

std::string_view to_string(Check c);

struct Outputs {
  bool series = false;
  bool trajectories = false;
  bool scan = false;
};

struct Scenario {
  std::string name;
  std::string description;
  std::string source;  ///< file path or "bundled:<name>"
  Units units{};
  double arrival_point = 0.0;
  std::optional<StateSpec> state;
  std::optional<GridSpec> time_grid;
  std::optional<GridSpec> x_grid;
  std::optional<LocalizationSpec> localization;
  std::optional<MonteCarloSpec> montecarlo;
  std::optional<ArcSpec> arc;
  std::set<Check> checks;
  std::optional<bool> expect_backflow;
  Tolerances tolerances{};
  Outputs outputs{};
};

/// Parses and validates scenario text. Errors are ErrorKind::config and name
/// the source, line and field.
Scenario parse_scenario(const std::string& text, const std::string& source);

/// Reads a file, or a bundled scenario when `path_or_name` is not a file but a bundled name.
Scenario load_scenario(const std::string& path_or_name);

struct BundledScenario {
  std::string name;
  std::string text;
};

const std::vector<BundledScenario>& bundled_scenarios();
std::vector<std::string> list_scenarios();
/// Human-readable description including the construction parameters. Config error for unknown names.
std::string describe(const std::string& name);

/// Builds the normalized state of a spec, parity and arrival point applied.
MomentumWavefunction build_state(const StateSpec& spec, const Units& units, double arrival_point);
KGrid k_grid_for(const StateSpec& spec);

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double limit = 0.0;
  std::string detail;
};

struct RunSummary {
  std::string scenario;
  bool passed = false;
  std::vector<CheckResult> checks;
  nlohmann::ordered_json report;  ///< the JSON summary, checks included
};

/// Runs every requested check. Writes summary.json and the requested CSV files
/// into `out_dir` when it is non-empty. Numerical failures inside a check
/// propagate as arrival::Error.
RunSummary run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir,
                        std::optional<std::uint64_t> seed_override = std::nullopt);

/// JSON text with every number at 17 significant digits; non-finite values become null.
std::string format_json(const nlohmann::ordered_json& value);

/// One CSV cell: 17 significant digits, '.' separator whatever the locale.
std::string format_number(double value);

}  // namespace arrival::scenario
