#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "chq/solvers.hpp"

namespace chq {

struct SweepRecord {
  double c = 0.0;
  Regime regime = Regime::Subcritical;
  SolveStatus status = SolveStatus::MaxIters;
  int iterations = 0;
  double residual = 0.0;
  double boundary_mass = 0.0;
  /// e_c with a potential, I_p(c^2) without.
  double energy = 0.0;
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double mu = 0.0;
  /// [1 - (c/c*)^{2(alpha+2)/N}]^{1/(q+2)}; NaN outside concentration studies.
  double eps_q = std::numeric_limits<double>::quiet_NaN();
  /// eps_B^{-2} = N/(2(N+alpha+2)) B(u_c).
  double eps_B = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> y_c;
  std::string diagnostics;
};

struct FitReport {
  double exponent = 0.0;
  double prefactor = 0.0;
  double theory_exponent = std::numeric_limits<double>::quiet_NaN();
  double theory_prefactor = std::numeric_limits<double>::quiet_NaN();
  double exponent_dev = std::numeric_limits<double>::quiet_NaN();
  double prefactor_dev = std::numeric_limits<double>::quiet_NaN();
  double x_min = 0.0;
  double x_max = 0.0;
  double r2 = 0.0;
  std::vector<double> xs;
  std::vector<double> ys;
};

/// OLS on (log x, log y). Requires >= 4 positive samples spanning a decade.
FitReport fit_power_law(std::span<const double> x, std::span<const double> y);
/// Fill theory values and relative deviations |fit - theory| / |theory|.
void set_theory(FitReport& f, double exponent, std::optional<double> prefactor = std::nullopt);

/// delta = 1 - (c/c*)^{2(alpha+2)/N}.
double critical_delta(double c_ratio, int dim, double alpha);
/// c/c* for a given delta.
double ratio_from_delta(double delta, int dim, double alpha);

struct Lambdas {
  std::vector<double> raw;     // lambda_i from each well's own q_i
  std::vector<double> capped;  // lambda_i where q_i = q_max, +inf otherwise
  double lambda = 0.0;         // min of capped
  std::vector<int> attaining;  // wells with capped value equal to lambda
};
Lambdas compute_lambdas(const Field& w0, const PotentialSpec& vspec, double c_star);

/// Global argmax of |u| refined by a parabola through the neighbours on each axis.
std::vector<double> locate_center(const Field& u);

/// e_c (or I_p) along a list of masses, with warm starts when continuation is set.
struct SweepOptions {
  FlowOptions flow;
  bool continuation = true;
  /// Independent c points run on this many threads (ignored under continuation).
  int jobs = 1;
  std::optional<Field> init;
};
std::vector<SweepRecord> energy_sweep(const ChoquardParams& params, const PotentialSpec* vspec,
                                      std::span<const double> c_list, const SweepOptions& opts,
                                      SpectralWorkspace& ws);

struct TrichotomyCell {
  double p = 0.0;
  double c = 0.0;
  Regime regime = Regime::Subcritical;
  std::optional<SolveStatus> status;
  double energy = 0.0;
  /// Lower endpoint: -(N/(2(N+alpha))) R c^{2(N+alpha)/N}.
  std::optional<double> predicted;
  /// Supercritical: I_p(u^t) of a Gaussian for t = t0 * witness_t, where t0
  /// is the dilation beyond which I_p(u^t) decreases.
  std::vector<double> witness_t;
  std::vector<double> witness_energy;
  std::string behavior;
  bool as_expected = false;
};
struct TrichotomyOptions {
  FlowOptions flow;
  PetviashviliOptions groundstate;
  /// At p = p_c the c grid is read as multiples of c*.
  bool critical_relative = true;
  std::vector<double> witness_t{1.0, 2.0, 4.0, 8.0};
  double init_width = 1.0;
  /// Relative band around the predicted lower-endpoint infimum.
  double lower_endpoint_tol = 0.02;
};
std::vector<TrichotomyCell> trichotomy_probe(int dim, double alpha, std::span<const double> c_grid,
                                             std::span<const double> p_grid,
                                             const TrichotomyOptions& opts, SpectralWorkspace& ws);

struct SubadditivityRow {
  double a = 0.0;
  double I_c = 0.0;
  double I_a = 0.0;
  double I_rest = 0.0;
  /// I_a + I_rest - I_c.
  double margin = 0.0;
  double tolerance = 0.0;
  bool holds = false;
  bool inconclusive = false;
};
std::vector<SubadditivityRow> subadditivity_check(const ChoquardParams& params, double c,
                                                  std::span<const double> a_list,
                                                  const FlowOptions& opts, SpectralWorkspace& ws);

struct WellSelection {
  int selected = -1;
  std::vector<double> y_c;
  /// Energy reached from a start at each well.
  std::vector<double> start_energy;
  bool ambiguous = false;
  Lambdas lambdas;
  SolveReport best;
};
WellSelection well_selection_test(const ChoquardParams& params, const PotentialSpec& vspec,
                                  double c_ratio, const FlowOptions& flow,
                                  const PetviashviliOptions& gs, SpectralWorkspace& ws);

struct ConcentrationPlan {
  ChoquardParams params;
  PotentialSpec vspec;
  /// c / c*, increasing toward 1.
  std::vector<double> c_ratios;
  std::vector<double> s_list;
  SweepOptions sweep;
  PetviashviliOptions groundstate;
};

struct UpperBoundWitness {
  double c = 0.0;
  double t = 0.0;
  double energy = 0.0;
  double e_c = 0.0;
};

struct ConcentrationReport {
  double c_star = 0.0;
  double q = 0.0;
  std::vector<SweepRecord> records;
  Lambdas lambdas;
  int selected_well = -1;
  std::vector<double> s_list;
  /// distances[k][j]: L^{2Ns/(N+alpha)} distance for s_list[k] at records[j].
  std::vector<std::vector<double>> distances;
  FitReport energy_fit;
  FitReport kinetic_fit;
  /// e_c / eps_q^q at the smallest delta against its limit.
  FitReport prefactor;
  std::optional<UpperBoundWitness> witness;
  std::vector<std::string> failures;
};
ConcentrationReport concentration_study(const ConcentrationPlan& plan, SpectralWorkspace& ws);

/// Cutoff test function c A_t t^{N/2}/c* phi(x - x0) W0(t (x - x0)), normalized to mass c.
Field cutoff_test_function(const Field& w0, double c, double t, std::span<const double> x0);

}  // namespace chq
