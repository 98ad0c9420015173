#include "chq/functionals.hpp"

#include <cmath>
#include <sstream>

#include "chq/log.hpp"

namespace chq {

Model::Model(ChoquardParams p, std::optional<Field> v, RieszScheme s)
    : params(p), potential(std::move(v)), scheme(s) {}

namespace {
void check(const Field& u, const SpectralWorkspace& ws, const ChoquardParams& params) {
  if (u.grid() != ws.grid()) throw DomainError("field grid does not match workspace grid");
  if (u.grid().dim() != params.dim()) throw DomainError("field dimension does not match params");
}

// |u|^{p-2} u, with the continuous extension 0 at u = 0.
double signed_power(double u, double p) {
  if (u == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(u), p - 1.0), u);
}
}  // namespace

NonlocalTerm nonlocal_term(const Field& u, const ChoquardParams& params, RieszScheme scheme,
                           SpectralWorkspace& ws) {
  check(u, ws, params);
  const double p = params.p();
  Field up(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) up[i] = std::pow(std::abs(u[i]), p);
  Field phi = riesz_convolve(up, {scheme, params.alpha()}, ws);
  Field force(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) force[i] = phi[i] * signed_power(u[i], p);
  double b = inner(phi, up);
  return {std::move(phi), std::move(force), b};
}

EnergyBreakdown energy(const Field& u, const Model& model, SpectralWorkspace& ws) {
  check(u, ws, model.params);
  EnergyBreakdown e;
  e.mass_sq = mass(u);
  e.A = inner(laplacian_apply(u, ws), u);
  e.B = nonlocal_term(u, model.params, model.scheme, ws).B;
  const double p = model.params.p();
  e.I_p = 0.5 * e.A - e.B / (2.0 * p);
  if (model.potential) {
    Field vu = *model.potential;
    for (std::size_t i = 0; i < u.size(); ++i) vu[i] *= u[i] * u[i];
    std::vector<double> t(vu.values().begin(), vu.values().end());
    e.C = u.grid().cell_weight() * pairwise_sum(t);
    e.E = 0.5 * e.A + 0.5 * e.C - e.B / (2.0 * p);
  }
  return e;
}

EnergyBreakdown energy(const Field& u, const ChoquardParams& params, const PotentialSpec* vspec,
                       SpectralWorkspace& ws) {
  std::optional<Field> v;
  if (vspec) v = evaluate_potential(*vspec, u.grid());
  return energy(u, Model(params, std::move(v)), ws);
}

Field gradient(const Field& u, const Model& model, SpectralWorkspace& ws) {
  check(u, ws, model.params);
  Field g = laplacian_apply(u, ws);
  g -= nonlocal_term(u, model.params, model.scheme, ws).force;
  if (model.potential)
    for (std::size_t i = 0; i < u.size(); ++i) g[i] += (*model.potential)[i] * u[i];
  return g;
}

Field gradient(const Field& u, const ChoquardParams& params, const PotentialSpec* vspec,
               SpectralWorkspace& ws) {
  std::optional<Field> v;
  if (vspec) v = evaluate_potential(*vspec, u.grid());
  return gradient(u, Model(params, std::move(v)), ws);
}

double equation_residual(const Field& u, const ChoquardParams& params, double a, double b,
                         SpectralWorkspace& ws, RieszScheme scheme) {
  Field r = laplacian_apply(u, ws);
  r *= a;
  r.axpy(b, u);
  r -= nonlocal_term(u, params, scheme, ws).force;
  return std::sqrt(mass(r) / mass(u));
}

Field dilate(const Field& u, double t, SpectralWorkspace& ws) {
  if (!(t > 0.0)) throw DomainError("dilate: t must be positive");
  if (u.grid() != ws.grid()) throw DomainError("field grid does not match workspace grid");
  if (t == 1.0) return u;
  Field out = resample_affine(u, u.grid(), t, {});
  out *= std::pow(t, 0.5 * u.grid().dim());
  double bm = boundary_mass(out);
  if (bm > kBoundaryMassWarn) {
    std::ostringstream os;
    os << "dilate(t=" << t << "): boundary mass " << bm << " exceeds " << kBoundaryMassWarn;
    warn(os.str());
  }
  return out;
}

Field normalize_mass(const Field& u, double c) {
  if (!(c > 0.0)) throw DomainError("normalize_mass: c must be positive");
  double m = std::sqrt(mass(u));
  if (!(m > 0.0)) throw DomainError("normalize_mass: zero field");
  Field out = u;
  out *= c / m;
  return out;
}

double wp_ratio(const Field& u, const ChoquardParams& params, SpectralWorkspace& ws) {
  if (params.regime() == Regime::LowerEndpoint)
    throw DomainError("wp_ratio: p must lie strictly above (N+alpha)/N");
  auto e = energy(u, Model(params), ws);
  if (!(e.B > 0.0)) throw DomainError("wp_ratio: B(u) = 0");
  return std::pow(e.A, params.kinetic_coeff()) * std::pow(e.mass_sq, params.mass_coeff()) / e.B;
}

double hls_ratio(const Field& u, const ChoquardParams& params, SpectralWorkspace& ws) {
  if (params.regime() != Regime::LowerEndpoint)
    throw DomainError("hls_ratio: requires p = (N+alpha)/N");
  const double m = mass(u);
  if (!(m > 0.0)) throw DomainError("hls_ratio: zero field");
  double b = nonlocal_term(u, params, RieszScheme::FreeSpace, ws).B;
  return b / std::pow(m, params.p());
}

double pohozaev_residual(const Field& u, const ChoquardParams& params, SpectralWorkspace& ws) {
  auto e = energy(u, Model(params), ws);
  const double k = params.b_dilation_exponent() / (2.0 * params.p());
  return std::abs(e.A - k * e.B) / e.A;
}

double virial_residual_critical(const Field& u, const ChoquardParams& params,
                                SpectralWorkspace& ws) {
  if (params.regime() != Regime::MassCritical)
    throw DomainError("virial_residual_critical: requires p = (N+alpha+2)/N");
  auto e = energy(u, Model(params), ws);
  const int n = params.dim();
  const double a = params.alpha();
  const double lhs_a = (n + a + 2.0) / n * e.A;
  const double lhs_m = (n + a + 2.0) / (a + 2.0) * e.mass_sq;
  return std::max(std::abs(lhs_a - e.B), std::abs(lhs_m - e.B)) / e.B;
}

Field evaluate_potential(const PotentialSpec& vspec, const Grid& grid) {
  if (vspec.dim() != grid.dim()) throw DomainError("potential dimension does not match grid");
  return sample(grid, [&](std::span<const double> x) { return vspec(x); });
}

double moment(const Field& u, std::span<const double> center, double q) {
  const Grid& g = u.grid();
  std::vector<double> t(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) t[i] = std::pow(g.dist2(i, center), 0.5 * q) * u[i] * u[i];
  return g.cell_weight() * pairwise_sum(t);
}

}  // namespace chq
