#pragma once

#include <optional>

#include "chq/params.hpp"
#include "chq/spectral.hpp"

namespace chq {

/// A = int |grad u|^2, B = int (I_alpha * |u|^p)|u|^p, C = int V u^2.
/// I_p = A/2 - B/(2p); E = A/2 + C/2 - B/(2p), present only with a potential.
struct EnergyBreakdown {
  double A = 0.0;
  double B = 0.0;
  double C = 0.0;
  double mass_sq = 0.0;
  double I_p = 0.0;
  std::optional<double> E;

  /// E when a potential is present, I_p otherwise.
  double objective() const { return E.value_or(I_p); }
};

/// Everything needed to evaluate the energy: exponents, optional sampled
/// potential, and the convolution scheme used for B.
struct Model {
  Model(ChoquardParams params, std::optional<Field> potential = std::nullopt,
        RieszScheme scheme = RieszScheme::FreeSpace);

  ChoquardParams params;
  std::optional<Field> potential;
  RieszScheme scheme;
};

/// (I_alpha * |u|^p), its product (I_alpha * |u|^p)|u|^{p-2}u, and B.
struct NonlocalTerm {
  Field phi;
  Field force;
  double B;
};
NonlocalTerm nonlocal_term(const Field& u, const ChoquardParams& params, RieszScheme scheme,
                           SpectralWorkspace& ws);

EnergyBreakdown energy(const Field& u, const Model& model, SpectralWorkspace& ws);
EnergyBreakdown energy(const Field& u, const ChoquardParams& params, const PotentialSpec* vspec,
                       SpectralWorkspace& ws);

/// L^2 gradient -Lap u + V u - (I_alpha * |u|^p)|u|^{p-2}u of E (or of I_p
/// when the model has no potential).
Field gradient(const Field& u, const Model& model, SpectralWorkspace& ws);
Field gradient(const Field& u, const ChoquardParams& params, const PotentialSpec* vspec,
               SpectralWorkspace& ws);

/// || -a Lap u + b u - (I_alpha*|u|^p)|u|^{p-2}u ||_2 / ||u||_2.
double equation_residual(const Field& u, const ChoquardParams& params, double a, double b,
                         SpectralWorkspace& ws, RieszScheme scheme = RieszScheme::FreeSpace);

/// Mass-preserving dilation u^t(x) = t^{N/2} u(t x) by spectral resampling.
/// Warns when the result carries boundary mass above kBoundaryMassWarn.
Field dilate(const Field& u, double t, SpectralWorkspace& ws);

/// Rescale u to |u|_2 = c.
Field normalize_mass(const Field& u, double c);

/// W_p(u) = A^{(Np-(N+alpha))/2} |u|_2^{N+alpha-(N-2)p} / B, for
/// p_low < p < p_high.
double wp_ratio(const Field& u, const ChoquardParams& params, SpectralWorkspace& ws);

/// B(u) / (|u|_2^2)^{(N+alpha)/N}; requires p = p_low.
double hls_ratio(const Field& u, const ChoquardParams& params, SpectralWorkspace& ws);

/// |A - ((Np-(N+alpha))/(2p)) B| / A.
double pohozaev_residual(const Field& u, const ChoquardParams& params, SpectralWorkspace& ws);

/// Largest relative defect in (N+alpha+2)/N A = (N+alpha+2)/(alpha+2) |u|^2 = B,
/// measured against B. Requires p = p_c.
double virial_residual_critical(const Field& u, const ChoquardParams& params,
                                SpectralWorkspace& ws);

Field evaluate_potential(const PotentialSpec& vspec, const Grid& grid);

/// int |x - center|^q u^2.
double moment(const Field& u, std::span<const double> center, double q);

}  // namespace chq
