#pragma once

// The Bohmian density at a fixed time is not a quadratic form in the state.
//
// Along the arc ξ ↦ cos ξ·φ + sin ξ·ψ every quadratic form is a combination
// of 1, cos 2ξ and sin 2ξ. The Bohmian density at t = 0 of a suitable pair
// instead starts positive and vanishes identically on a final stretch of the
// arc, which no such combination can do.

#include "arrival/bohm.hpp"
#include "arrival/kijowski.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace arrival {

struct PairOptions {
  /// φ is shifted in time so that J_φ(0) is this fraction of its peak, on the rising flank.
  double phi_current_fraction = 0.25;
  /// Smallest |min J| accepted as backflow when picking ψ.
  double backflow_threshold = 1e-4;
};

struct ArcPair {
  MomentumWavefunction phi;  ///< crossing x = 0 at t = 0 with J > 0 and no earlier dip
  MomentumWavefunction psi;  ///< inside a backflow interval at t = 0
  double phi_time_shift = 0.0;
  double psi_time_shift = 0.0;
  double phase = 0.0;  ///< global phase applied to φ so that Re⟨φ, ψ⟩ = 0
  complex overlap{};   ///< ⟨φ, ψ⟩ after the phase
  double phi_current = 0.0;
  double psi_current = 0.0;
};

/// Builds the pair from a backflow-free packet and a backflow state, both unit
/// norm on the same k grid. `grid` must cover the transit of both base states.
ArcPair construct_arc_pair(const MomentumWavefunction& phi_base,
                                        const MomentumWavefunction& psi_base, const TimeGrid& grid,
                                        const PairOptions& options = {});

/// The scanned quantity at one point of the arc. For the Bohmian density
/// β = branch · J(0) / p_infinity with branch = χ₊(0) - χ₋(0) ∈ {-1, 0, 1};
/// between switches of the branch β is smooth in ξ. Quadratic forms report branch 1.
struct ArcValue {
  double beta = 0.0;
  int branch = 1;
};

struct Arc {
  std::string phi_label;
  std::string psi_label;
  std::string quantity;  ///< "bohm" or the name of the quadratic form
  complex overlap{};     ///< ⟨φ, ψ⟩
  std::function<ArcValue(double)> value;
};

/// B at t = 0 of the renormalized cos ξ·φ + sin ξ·ψ, through the full
/// current → flux → cutoff pipeline on `grid` at every ξ.
Arc bohm_arc(const MomentumWavefunction& phi, const MomentumWavefunction& psi, const TimeGrid& grid,
             double cutoff_relative = 1e-9);

/// q of the renormalized cos ξ·φ + sin ξ·ψ.
Arc form_arc(const QuadraticFormModel& q, const MomentumWavefunction& phi,
             const MomentumWavefunction& psi);

struct SuperpositionScan {
  Eigen::ArrayXd xi;
  Eigen::ArrayXd beta;
  Eigen::ArrayXi branch;
  std::string phi_label;
  std::string psi_label;
  std::string quantity;
  complex overlap{};
};

/// Samples the arc at m >= 33 points uniform on [0, π/2]. Errors carry the offending ξ.
SuperpositionScan scan(const Arc& arc, Eigen::Index m);

SuperpositionScan superposition_scan(const MomentumWavefunction& phi, const MomentumWavefunction& psi,
                                     Eigen::Index m, const TimeGrid& grid,
                                     double cutoff_relative = 1e-9);

SuperpositionScan form_scan(const QuadraticFormModel& q, const MomentumWavefunction& phi,
                            const MomentumWavefunction& psi, Eigen::Index m);

enum class FitNorm {
  samples,  ///< Euclidean norm over the scan points
  arc,      ///< L2 norm on [0, π/2]
};

struct SinusoidFit {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double residual_rel = 0.0;     ///< ‖β − fit‖ / ‖β‖ in the chosen norm
  double normal_residual = 0.0;  ///< ‖Xᵀ W (β − fit)‖ / (‖√W X‖ ‖√W β‖), zero at the optimum
  FitNorm norm = FitNorm::samples;
  Eigen::ArrayXd fitted;         ///< fit at the scan points
  std::vector<double> switches;  ///< branch switch points located on the arc (arc norm only)

  double operator()(double xi) const { return a + b * std::cos(2 * xi) + c * std::sin(2 * xi); }
};

/// Least squares over span{1, cos 2ξ, sin 2ξ} on the scan points.
SinusoidFit sinusoid_fit(const SuperpositionScan& scan);

/// Weighted least squares on the nodes and weights given.
SinusoidFit sinusoid_fit(const Eigen::ArrayXd& xi, const Eigen::ArrayXd& beta,
                         const Eigen::ArrayXd& weights);

/// Least squares in L2(0, π/2). Branch switches between neighbouring scan
/// points are located by bisection on the arc; each smooth piece is then
/// integrated by Gauss-Legendre. Pieces on branch 0 need no evaluation since β
/// vanishes there. Throws a resolution error if a node disagrees with the
/// branch of its piece (a switch the scan did not see).
SinusoidFit arc_fit(const Arc& arc, const SuperpositionScan& scan, int nodes_per_piece = 16,
                    double switch_tolerance = 1e-11);

struct ViolationTolerances {
  double positive = 1e-3;         ///< β(0) must exceed this
  double zero_relative = 1e-10;   ///< β < zero_relative · max β counts as zero
  double plateau_fraction = 0.2;  ///< share of [0, π/2] the trailing zero run must cover
  double residual = 0.02;
};

struct ViolationReport {
  bool violated = false;
  double beta0 = 0.0;
  std::optional<double> plateau_start;  ///< first scan point of the trailing zero run
  double plateau_fraction = 0.0;
  double residual_rel = 0.0;
  bool positive_witness = false;
  bool plateau_witness = false;
  bool misfit_witness = false;
  complex overlap{};
  std::string failed;  ///< names of failed witnesses, empty when violated
};

ViolationReport violation_report(const SuperpositionScan& scan, const SinusoidFit& fit,
                                 const ViolationTolerances& tol = {});

}  // namespace arrival
