#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chq/functionals.hpp"

namespace chq {

enum class SolveStatus { Converged, Vanishing, Blowup, MaxIters };
std::string to_string(SolveStatus s);

struct PetviashviliOptions {
  double tol_residual = 1e-10;
  int max_iters = 2000;
  /// Stabilizing exponent; defaults to (2p-1)/(2p-2).
  std::optional<double> gamma;
  /// Width of the centered Gaussian initial guess (ignored when init is set).
  double init_width = 1.0;
  std::optional<Field> init;
  RieszScheme scheme = RieszScheme::FreeSpace;
};

struct FlowOptions {
  double step0 = 1.0;
  double backtrack = 0.5;
  /// Convergence when ||tangential gradient|| / ||gradient|| <= tol_grad.
  double tol_grad = 1e-8;
  int max_iters = 20000;
  /// Energy differences near a minimizer drown in roundoff of A, B and C.
  /// Once the objective stops moving (or the line search cannot descend),
  /// a relative tangential gradient below stall_tol also counts as converged.
  double stall_tol = 1e-6;
  int stall_window = 50;
  double blowup_A_factor = 1e6;
  double vanish_peak_ratio = 1e-6;
  double energy_floor = -1e9;
  /// Grid-limited collapse: Blowup once A/|u|^2 reaches this fraction of the
  /// largest kinetic symbol N (pi/h)^2 the grid can represent.
  double blowup_resolution_fraction = 0.05;
  /// Box-limited spreading: Vanishing once this fraction of the mass sits in
  /// the boundary shell.
  double vanish_boundary_mass = 1e-2;
  /// A stationary state whose boundary mass exceeds this, reached with A
  /// below its initial value, is a box-limited spread state: Vanishing.
  double converged_boundary_mass = 1e-6;
  /// Shift b of the (-Lap + b)^{-1} preconditioner.
  double precond_shift = 1.0;
  /// Raise the shift to -mu when the current multiplier is below -precond_shift.
  bool adaptive_shift = true;
  /// Polak-Ribiere conjugate directions (false: preconditioned steepest descent).
  bool conjugate = true;
  RieszScheme scheme = RieszScheme::FreeSpace;
};

struct SolveReport {
  explicit SolveReport(Field f) : field(std::move(f)) {}

  SolveStatus status = SolveStatus::MaxIters;
  Field field;
  EnergyBreakdown energy;
  /// Lagrange multiplier estimate <E'(u), u> / |u|_2^2.
  double mu = 0.0;
  int iterations = 0;
  /// Final residual: equation residual (Petviashvili) or relative tangential
  /// gradient (flow).
  double residual = 0.0;
  std::vector<double> residual_history;
  /// Objective value after every accepted step (flow only).
  std::vector<double> energy_history;
  double boundary_mass = 0.0;
  /// Target mass |u|_2 (flow) or the achieved |u|_2 (Petviashvili).
  double c = 0.0;
  std::string diagnostics;
};

/// Groundstate of -Lap W + W = (I_alpha * |W|^p)|W|^{p-2} W by the stabilized
/// fixed point W <- S^gamma (-Lap + 1)^{-1} N(W), S = <(-Lap+1)W, W> / B(W).
SolveReport petviashvili_solve(const ChoquardParams& params, const PetviashviliOptions& opts,
                               SpectralWorkspace& ws);

/// Q(x) = lambda W(mu x), mu = sqrt(b/a), lambda^{2p-2} = b mu^alpha, which
/// maps a solution of the unit equation onto -a Lap Q + b Q = N(Q).
Field rescale_unit_to_Qp(const Field& w, const ChoquardParams& params, SpectralWorkspace& ws);
/// The (mu, lambda) pair used by rescale_unit_to_Qp.
std::pair<double, double> unit_to_Qp_scaling(const ChoquardParams& params);

struct CriticalGroundstate {
  double c_star;
  Field w0;  // unit-coefficient groundstate
  Field q;   // Q_{p_c}
  SolveReport report;
};

/// Mass-critical groundstate and c* = |Q_{p_c}|_2. Results are cached per
/// (N, alpha, grid) for the life of the process.
CriticalGroundstate critical_groundstate(const ChoquardParams& params,
                                         const PetviashviliOptions& opts, SpectralWorkspace& ws);
double critical_mass(const ChoquardParams& params, const PetviashviliOptions& opts,
                     SpectralWorkspace& ws);

/// Minimize E (or I_p without potential) on the sphere |u|_2 = c by
/// preconditioned projected descent with Armijo backtracking.
SolveReport minimize_on_sphere(const ChoquardParams& params, double c, const PotentialSpec* vspec,
                               const Field& init, const FlowOptions& opts, SpectralWorkspace& ws);
SolveReport minimize_on_sphere(const Model& model, double c, const Field& init,
                               const FlowOptions& opts, SpectralWorkspace& ws);

/// True iff the multiplier of a converged report is negative. Throws for
/// reports that did not converge.
bool multiplier_sign_check(const SolveReport& report);

/// Centered Gaussian exp(-|x|^2 / (2 w^2)), optionally shifted.
Field gaussian(const Grid& g, double width, std::span<const double> center = {});

}  // namespace chq
