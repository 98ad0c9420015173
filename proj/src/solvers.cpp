#include "chq/solvers.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

#include "chq/log.hpp"

namespace chq {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::Vanishing: return "Vanishing";
    case SolveStatus::Blowup: return "Blowup";
    case SolveStatus::MaxIters: return "MaxIters";
  }
  return "?";
}

Field gaussian(const Grid& g, double width, std::span<const double> center) {
  std::vector<double> c0(g.dim(), 0.0);
  for (std::size_t d = 0; d < center.size() && d < c0.size(); ++d) c0[d] = center[d];
  return sample(g, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (int d = 0; d < g.dim(); ++d) r2 += (x[d] - c0[d]) * (x[d] - c0[d]);
    return std::exp(-0.5 * r2 / (width * width));
  });
}

SolveReport petviashvili_solve(const ChoquardParams& params, const PetviashviliOptions& opts,
                               SpectralWorkspace& ws) {
  if (params.regime() == Regime::LowerEndpoint)
    throw DomainError("petviashvili: p must lie strictly above (N+alpha)/N");
  if (!(opts.tol_residual > 0.0)) throw DomainError("petviashvili: tolerance must be positive");
  const double p = params.p();
  const double gamma = opts.gamma.value_or((2.0 * p - 1.0) / (2.0 * p - 2.0));
  const Grid& g = ws.grid();

  Field v = opts.init ? *opts.init : gaussian(g, opts.init_width);
  if (v.grid() != g) throw DomainError("petviashvili: initial field is on a different grid");

  SolveReport rep(v);
  double s = 0.0;
  double resid = 0.0;
  int it = 0;
  for (; it <= opts.max_iters; ++it) {
    auto nl = nonlocal_term(v, params, opts.scheme, ws);
    Field lv = laplacian_apply(v, ws);
    lv += v;
    s = inner(lv, v) / nl.B;
    Field r = lv - nl.force;
    resid = std::sqrt(mass(r) / mass(v));
    rep.residual_history.push_back(resid);
    if (!std::isfinite(resid) || !std::isfinite(s) || !(nl.B > 0.0)) {
      rep.diagnostics = "iteration left the finite range";
      break;
    }
    if (resid <= opts.tol_residual && std::abs(s - 1.0) <= 1e-10) {
      rep.status = SolveStatus::Converged;
      break;
    }
    if (it == opts.max_iters) break;
    Field next = inverse_helmholtz(nl.force, 1.0, ws);
    next *= std::pow(s, gamma);
    v = std::move(next);
  }
  if (rep.status != SolveStatus::Converged && rep.diagnostics.empty()) {
    std::ostringstream os;
    os << "no convergence after " << it << " iterations: residual " << resid << ", S " << s;
    rep.diagnostics = os.str();
  }
  rep.iterations = it;
  rep.residual = resid;
  rep.energy = energy(v, Model(params, std::nullopt, opts.scheme), ws);
  rep.mu = (rep.energy.A - rep.energy.B) / rep.energy.mass_sq;
  rep.boundary_mass = boundary_mass(v);
  rep.c = std::sqrt(rep.energy.mass_sq);
  rep.field = std::move(v);
  return rep;
}

std::pair<double, double> unit_to_Qp_scaling(const ChoquardParams& params) {
  const double a = params.kinetic_coeff();
  const double b = params.mass_coeff();
  const double mu = std::sqrt(b / a);
  const double lambda = std::pow(b * std::pow(mu, params.alpha()), 1.0 / (2.0 * params.p() - 2.0));
  return {mu, lambda};
}

Field rescale_unit_to_Qp(const Field& w, const ChoquardParams& params, SpectralWorkspace& ws) {
  if (w.grid() != ws.grid()) throw DomainError("field grid does not match workspace grid");
  auto [mu, lambda] = unit_to_Qp_scaling(params);
  if (mu > 1.0) {
    // Samples mapped from beyond W's box are zero; the jump is W at the edge.
    const Grid& g = w.grid();
    double edge = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto idx = g.unflatten(i);
      for (int d = 0; d < g.dim(); ++d)
        if (idx[d] == 0) edge = std::max(edge, std::abs(w[i]));
    }
    if (edge > kBoundaryMassWarn * w.peak()) {
      std::ostringstream os;
      os << "rescale_unit_to_Qp: W is cut at relative level " << edge / w.peak()
         << " when contracted by " << mu << "; enlarge the box";
      warn(os.str());
    }
  }
  Field q = mu == 1.0 ? w : resample_affine(w, w.grid(), mu, {});
  q *= lambda;
  double bm = boundary_mass(q);
  if (bm > kBoundaryMassWarn) {
    std::ostringstream os;
    os << "rescale_unit_to_Qp: boundary mass " << bm << " exceeds " << kBoundaryMassWarn;
    warn(os.str());
  }
  return q;
}

namespace {
using CacheKey = std::tuple<int, double, int, double, double>;
std::mutex& cache_mutex() {
  static std::mutex m;
  return m;
}
std::map<CacheKey, CriticalGroundstate>& cache() {
  static std::map<CacheKey, CriticalGroundstate> c;
  return c;
}
}  // namespace

CriticalGroundstate critical_groundstate(const ChoquardParams& params,
                                         const PetviashviliOptions& opts, SpectralWorkspace& ws) {
  if (params.regime() != Regime::MassCritical)
    throw DomainError("critical_mass: requires p = (N+alpha+2)/N");
  const Grid& g = ws.grid();
  CacheKey key{g.dim(), params.alpha(), g.points_per_axis(), g.box_length(), opts.tol_residual};
  {
    std::lock_guard lock(cache_mutex());
    auto it = cache().find(key);
    if (it != cache().end()) return it->second;
  }
  SolveReport rep = petviashvili_solve(params, opts, ws);
  if (rep.status != SolveStatus::Converged)
    throw Error("critical_mass: groundstate solve failed: " + rep.diagnostics);
  Field q = rescale_unit_to_Qp(rep.field, params, ws);
  CriticalGroundstate out{std::sqrt(mass(q)), rep.field, std::move(q), rep};
  std::lock_guard lock(cache_mutex());
  return cache().emplace(key, std::move(out)).first->second;
}

double critical_mass(const ChoquardParams& params, const PetviashviliOptions& opts,
                     SpectralWorkspace& ws) {
  return critical_groundstate(params, opts, ws).c_star;
}

namespace {
struct Evaluation {
  EnergyBreakdown e;
  Field grad;
};

Evaluation evaluate(const Field& u, const Model& model, SpectralWorkspace& ws) {
  const double p = model.params.p();
  Field lap = laplacian_apply(u, ws);
  auto nl = nonlocal_term(u, model.params, model.scheme, ws);
  Evaluation ev{{}, lap - nl.force};
  ev.e.mass_sq = mass(u);
  ev.e.A = inner(lap, u);
  ev.e.B = nl.B;
  ev.e.I_p = 0.5 * ev.e.A - ev.e.B / (2.0 * p);
  if (model.potential) {
    const Field& v = *model.potential;
    std::vector<double> t(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      ev.grad[i] += v[i] * u[i];
      t[i] = v[i] * u[i] * u[i];
    }
    ev.e.C = u.grid().cell_weight() * pairwise_sum(t);
    ev.e.E = 0.5 * ev.e.A + 0.5 * ev.e.C - ev.e.B / (2.0 * p);
  }
  return ev;
}

double objective_only(const Field& u, const Model& model, SpectralWorkspace& ws) {
  return energy(u, model, ws).objective();
}
}  // namespace

SolveReport minimize_on_sphere(const Model& model, double c, const Field& init,
                               const FlowOptions& opts, SpectralWorkspace& ws) {
  if (!(c > 0.0)) throw DomainError("minimize_on_sphere: c must be positive");
  if (!(opts.step0 > 0.0)) throw DomainError("minimize_on_sphere: step0 must be positive");
  if (!(opts.backtrack > 0.0 && opts.backtrack < 1.0))
    throw DomainError("minimize_on_sphere: backtrack must lie in (0, 1)");
  if (init.grid() != ws.grid()) throw DomainError("minimize_on_sphere: init on a different grid");
  if (!(mass(init) > 0.0)) throw DomainError("minimize_on_sphere: init must be nonzero");

  const Grid& g = ws.grid();
  const double c2 = c * c;
  const double kmax2 = g.dim() * std::pow(std::numbers::pi / g.spacing(), 2);
  constexpr double kArmijo = 1e-4;

  Field u = normalize_mass(init, c);
  Evaluation ev = evaluate(u, model, ws);
  const double a0 = ev.e.A;
  const double peak0 = u.peak();

  SolveReport rep(u);
  rep.c = c;
  rep.energy_history.push_back(ev.e.objective());

  std::optional<Field> dir_prev, pgt_prev;
  double gt_dot_pgt_prev = 0.0;
  double tau = opts.step0;
  double rel = 0.0;
  bool converged = false;
  std::string why;
  int it = 0;

  for (; it < opts.max_iters; ++it) {
    const double mu = inner(ev.grad, u) / c2;
    Field gt = ev.grad;
    gt.axpy(-mu, u);
    const double gnorm = std::sqrt(mass(ev.grad));
    rel = gnorm > 0.0 ? std::sqrt(mass(gt)) / gnorm : 0.0;
    rep.residual_history.push_back(rel);
    if (rel <= opts.tol_grad) {
      converged = true;
      break;
    }

    // Preconditioned gradient projected onto the tangent space in the
    // P-inner product, so <u, d> = 0 and <grad, d> >= 0.
    const double shift = opts.adaptive_shift ? std::max(opts.precond_shift, -mu) : opts.precond_shift;
    Field pg = inverse_helmholtz(ev.grad, shift, ws);
    Field pu = inverse_helmholtz(u, shift, ws);
    Field d = pg;
    d.axpy(-inner(pg, u) / inner(pu, u), pu);

    Field s = d;
    s *= -1.0;
    const double gt_dot_pgt = inner(gt, d);
    if (opts.conjugate && dir_prev && gt_dot_pgt_prev > 0.0) {
      double beta = (gt_dot_pgt - inner(gt, *pgt_prev)) / gt_dot_pgt_prev;
      if (beta > 0.0) {
        Field prev = *dir_prev;
        prev.axpy(-inner(prev, u) / c2, u);
        s.axpy(beta, prev);
      }
    }
    double slope = inner(ev.grad, s);
    if (!(slope < 0.0)) {
      s = d;
      s *= -1.0;
      slope = inner(ev.grad, s);
    }
    if (!(slope < 0.0)) {
      converged = true;
      break;
    }

    const double e_cur = ev.e.objective();
    Field trial = u;
    auto search = [&] {
      for (int ls = 0; ls < 60; ++ls) {
        trial = u;
        trial.axpy(tau, s);
        trial = normalize_mass(trial, c);
        double e_trial = objective_only(trial, model, ws);
        if (std::isfinite(e_trial) && e_trial <= e_cur + kArmijo * tau * slope) return true;
        tau *= opts.backtrack;
      }
      return false;
    };
    bool accepted = search();
    if (!accepted) {
      // Restart from the preconditioned descent direction with a fresh step.
      s = d;
      s *= -1.0;
      slope = inner(ev.grad, s);
      tau = opts.step0;
      dir_prev.reset();
      accepted = slope < 0.0 && search();
    }
    if (!accepted) {
      if (rel <= opts.stall_tol) {
        converged = true;
        why = "line search at energy roundoff";
      } else {
        why = "line search failed";
      }
      break;
    }

    u = std::move(trial);
    ev = evaluate(u, model, ws);
    rep.energy_history.push_back(ev.e.objective());
    dir_prev = s;
    pgt_prev = d;
    gt_dot_pgt_prev = gt_dot_pgt;
    tau = std::min(tau * 2.0, 1e6);

    const auto& hist = rep.energy_history;
    if (static_cast<int>(hist.size()) > opts.stall_window) {
      const double scale = std::abs(ev.e.A) + std::abs(ev.e.B) + std::abs(ev.e.C);
      const double drop = hist[hist.size() - 1 - opts.stall_window] - hist.back();
      if (drop <= 1e-14 * scale && rel <= opts.stall_tol) {
        converged = true;
        why = "objective stationary to roundoff";
        break;
      }
    }

    const double obj = ev.e.objective();
    if (ev.e.A >= opts.blowup_A_factor * a0 || obj < opts.energy_floor ||
        ev.e.A / c2 >= opts.blowup_resolution_fraction * kmax2) {
      rep.status = SolveStatus::Blowup;
      std::ostringstream os;
      os << "kinetic energy " << ev.e.A << " (initial " << a0 << "), objective " << obj
         << ", grid limit " << kmax2 * c2;
      why = os.str();
      break;
    }
    const double bm = boundary_mass(u);
    if (u.peak() <= opts.vanish_peak_ratio * peak0 ||
        (bm >= opts.vanish_boundary_mass && ev.e.A < a0)) {
      rep.status = SolveStatus::Vanishing;
      std::ostringstream os;
      os << "peak " << u.peak() << " (initial " << peak0 << "), boundary mass " << bm
         << ", kinetic energy " << ev.e.A << " (initial " << a0 << ")";
      why = os.str();
      break;
    }
  }

  rep.boundary_mass = boundary_mass(u);
  if (rep.status != SolveStatus::Blowup && rep.status != SolveStatus::Vanishing) {
    const bool spread = rep.boundary_mass > opts.converged_boundary_mass && ev.e.A < a0;
    if (spread) {
      rep.status = SolveStatus::Vanishing;
      std::ostringstream os;
      os << "stationary state is box-limited: boundary mass " << rep.boundary_mass
         << ", kinetic energy " << ev.e.A << " (initial " << a0 << ")";
      why = os.str();
    } else if (converged) {
      rep.status = SolveStatus::Converged;
    } else {
      rep.status = SolveStatus::MaxIters;
      if (why.empty()) why = "iteration limit reached";
      std::ostringstream os;
      os << why << ": relative tangential gradient " << rel;
      why = os.str();
    }
  }
  rep.diagnostics = why;
  rep.iterations = it;
  rep.residual = rel;
  rep.energy = ev.e;
  rep.mu = inner(ev.grad, u) / c2;
  rep.field = std::move(u);
  return rep;
}

SolveReport minimize_on_sphere(const ChoquardParams& params, double c, const PotentialSpec* vspec,
                               const Field& init, const FlowOptions& opts, SpectralWorkspace& ws) {
  std::optional<Field> v;
  if (vspec) v = evaluate_potential(*vspec, ws.grid());
  return minimize_on_sphere(Model(params, std::move(v), opts.scheme), c, init, opts, ws);
}

bool multiplier_sign_check(const SolveReport& report) {
  if (report.status != SolveStatus::Converged)
    throw DomainError("multiplier_sign_check: report did not converge (" +
                      to_string(report.status) + ")");
  return report.mu < 0.0;
}

}  // namespace chq
