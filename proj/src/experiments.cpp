#include "chq/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "chq/log.hpp"
#include "chq/verify.hpp"

namespace chq {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

FitReport fit_power_law(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("fit_power_law: x and y differ in length");
  if (x.size() < 4) throw DomainError("fit_power_law: need at least 4 samples");
  FitReport f;
  f.x_min = kInf;
  f.x_max = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw DomainError("fit_power_law: samples must be positive");
    f.x_min = std::min(f.x_min, x[i]);
    f.x_max = std::max(f.x_max, x[i]);
  }
  if (f.x_max < 10.0 * f.x_min * (1.0 - 1e-12))
    throw DomainError("fit_power_law: x must span at least one decade");
  f.xs.assign(x.begin(), x.end());
  f.ys.assign(y.begin(), y.end());

  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    const double dy = std::log(y[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  f.exponent = sxy / sxx;
  f.prefactor = std::exp(my - f.exponent * mx);
  double sse = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = std::log(y[i]) - (my + f.exponent * (std::log(x[i]) - mx));
    sse += r * r;
  }
  f.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
  return f;
}

void set_theory(FitReport& f, double exponent, std::optional<double> prefactor) {
  f.theory_exponent = exponent;
  f.exponent_dev = exponent != 0.0 ? std::abs(f.exponent - exponent) / std::abs(exponent)
                                   : std::abs(f.exponent);
  if (prefactor) {
    f.theory_prefactor = *prefactor;
    f.prefactor_dev = std::abs(f.prefactor - *prefactor) / std::abs(*prefactor);
  }
}

double critical_delta(double c_ratio, int dim, double alpha) {
  return 1.0 - std::pow(c_ratio, 2.0 * (alpha + 2.0) / dim);
}

double ratio_from_delta(double delta, int dim, double alpha) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("delta must lie in (0, 1)");
  return std::pow(1.0 - delta, dim / (2.0 * (alpha + 2.0)));
}

Lambdas compute_lambdas(const Field& w0, const PotentialSpec& vspec, double c_star) {
  if (w0.grid().dim() != vspec.dim()) throw DomainError("compute_lambdas: dimension mismatch");
  const double bm = boundary_mass(w0);
  if (bm > kBoundaryMassWarn) {
    std::ostringstream os;
    os << "compute_lambdas: groundstate boundary mass " << bm << " makes moments unreliable";
    warn(os.str());
  }
  const std::vector<double> origin(w0.grid().dim(), 0.0);
  const double q = vspec.q_max();
  Lambdas out;
  out.lambda = kInf;
  for (const Well& w : vspec.wells()) {
    const double m = moment(w0, origin, w.q);
    const double l = std::pow(w.q * w.mu * m / (2.0 * c_star * c_star), 1.0 / (w.q + 2.0));
    out.raw.push_back(l);
    out.capped.push_back(w.q == q ? l : kInf);
    out.lambda = std::min(out.lambda, out.capped.back());
  }
  for (std::size_t i = 0; i < out.capped.size(); ++i)
    if (std::abs(out.capped[i] - out.lambda) <= 1e-9 * out.lambda) out.attaining.push_back(int(i));
  return out;
}

std::vector<double> locate_center(const Field& u) {
  const Grid& g = u.grid();
  const int m = g.points_per_axis();
  const std::size_t k = u.argmax_abs();
  const auto idx = g.unflatten(k);
  std::vector<double> y(g.dim());
  for (int d = 0; d < g.dim(); ++d) {
    auto lo = idx, hi = idx;
    lo[d] = (idx[d] + m - 1) % m;
    hi[d] = (idx[d] + 1) % m;
    const double fm = std::abs(u[g.flatten(lo)]);
    const double f0 = std::abs(u[k]);
    const double fp = std::abs(u[g.flatten(hi)]);
    const double den = fm - 2.0 * f0 + fp;
    double off = den < 0.0 ? 0.5 * (fm - fp) / den : 0.0;
    off = std::clamp(off, -0.5, 0.5);
    y[d] = g.coord(idx[d]) + off * g.spacing();
  }
  return y;
}

namespace {
std::vector<double> default_center(const PotentialSpec* vspec, int dim) {
  if (!vspec) return std::vector<double>(dim, 0.0);
  const double q = vspec->q_max();
  for (const Well& w : vspec->wells())
    if (w.q == q) return w.center;
  return vspec->wells().front().center;
}

SweepRecord summarize(const SolveReport& r, const ChoquardParams& params) {
  SweepRecord s;
  s.c = r.c;
  s.regime = params.regime();
  s.status = r.status;
  s.iterations = r.iterations;
  s.residual = r.residual;
  s.boundary_mass = r.boundary_mass;
  s.energy = r.energy.objective();
  s.A = r.energy.A;
  s.B = r.energy.B;
  s.C = r.energy.C;
  s.mu = r.mu;
  if (params.regime() == Regime::MassCritical) {
    const int n = params.dim();
    s.eps_B = 1.0 / std::sqrt(n / (2.0 * (n + params.alpha() + 2.0)) * r.energy.B);
  }
  s.y_c = locate_center(r.field);
  s.diagnostics = r.diagnostics;
  return s;
}

struct SweepRun {
  std::vector<SweepRecord> records;
  std::vector<Field> fields;
};

SweepRun run_sweep(const ChoquardParams& params, const PotentialSpec* vspec,
                   std::span<const double> c_list, const SweepOptions& opts, SpectralWorkspace& ws) {
  const Grid& g = ws.grid();
  std::optional<Field> v;
  if (vspec) v = evaluate_potential(*vspec, g);
  const Model model(params, v, opts.flow.scheme);
  const Field init0 = opts.init ? *opts.init : gaussian(g, 1.0, default_center(vspec, g.dim()));

  SweepRun out;
  out.records.resize(c_list.size());
  out.fields.assign(c_list.size(), Field(g));
  const int jobs = std::max(1, opts.jobs);
  if (opts.continuation || jobs == 1 || c_list.size() < 2) {
    Field init = init0;
    for (std::size_t i = 0; i < c_list.size(); ++i) {
      SolveReport r = minimize_on_sphere(model, c_list[i], init, opts.flow, ws);
      out.records[i] = summarize(r, params);
      if (opts.continuation && r.field.all_finite()) init = r.field;
      out.fields[i] = std::move(r.field);
    }
    return out;
  }
  // Independent points: each worker owns a workspace; results land in their
  // slot by index, so the merge order does not depend on scheduling.
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(jobs);
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&, w] {
      try {
        SpectralWorkspace local(g);
        for (std::size_t i = w; i < c_list.size(); i += jobs) {
          SolveReport r = minimize_on_sphere(model, c_list[i], init0, opts.flow, local);
          out.records[i] = summarize(r, params);
          out.fields[i] = std::move(r.field);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}
}  // namespace

std::vector<SweepRecord> energy_sweep(const ChoquardParams& params, const PotentialSpec* vspec,
                                      std::span<const double> c_list, const SweepOptions& opts,
                                      SpectralWorkspace& ws) {
  for (double c : c_list)
    if (!(c > 0.0)) throw DomainError("energy_sweep: masses must be positive");
  return run_sweep(params, vspec, c_list, opts, ws).records;
}

std::vector<TrichotomyCell> trichotomy_probe(int dim, double alpha, std::span<const double> c_grid,
                                             std::span<const double> p_grid,
                                             const TrichotomyOptions& opts, SpectralWorkspace& ws) {
  std::vector<ChoquardParams> ps;
  for (double p : p_grid) ps.emplace_back(dim, alpha, p);
  const Grid& g = ws.grid();
  std::vector<TrichotomyCell> out;
  for (const ChoquardParams& pr : ps) {
    std::optional<double> c_star;
    for (double c_in : c_grid) {
      TrichotomyCell cell;
      cell.p = pr.p();
      cell.regime = pr.regime();
      cell.c = c_in;
      std::ostringstream os;
      try {
        if (pr.regime() == Regime::MassCritical && opts.critical_relative) {
          if (!c_star) c_star = critical_mass(pr, opts.groundstate, ws);
          cell.c = c_in * *c_star;
        }
        if (pr.regime() == Regime::Supercritical) {
          const Field base = normalize_mass(gaussian(g, opts.init_width), cell.c);
          const EnergyBreakdown e0 = energy(base, Model(pr), ws);
          const double k = pr.b_dilation_exponent();
          // I_p(u^t) = t^2 A/2 - t^k B/(2p) decreases for t beyond t0.
          const double t0 = std::max(1.0, std::pow(2.0 * pr.p() * e0.A / (k * e0.B), 1.0 / (k - 2.0)));
          for (double m : opts.witness_t) {
            const double t = t0 * m;
            // u^t of a Gaussian is a Gaussian; sampling it on the box scaled by
            // 1/t keeps the resolution of every evaluation equal to the base's.
            const Grid gt(g.dim(), g.points_per_axis(), g.box_length() / t);
            SpectralWorkspace wt(gt);
            const Field ut = normalize_mass(gaussian(gt, opts.init_width / t), cell.c);
            cell.witness_t.push_back(t);
            cell.witness_energy.push_back(energy(ut, Model(pr), wt).I_p);
          }
          bool decreasing = cell.witness_energy.size() >= 2;
          for (std::size_t i = 1; i < cell.witness_energy.size(); ++i)
            if (cell.witness_energy[i] >= cell.witness_energy[i - 1])
              decreasing = false;
          cell.energy = cell.witness_energy.empty() ? 0.0 : cell.witness_energy.back();
          cell.as_expected = decreasing;
          os << "dilation witness " << (decreasing ? "decreasing" : "not decreasing");
        } else {
          const Field init = gaussian(g, opts.init_width);
          SolveReport r = minimize_on_sphere(pr, cell.c, nullptr, init, opts.flow, ws);
          cell.status = r.status;
          cell.energy = r.energy.I_p;
          os << to_string(r.status);
          switch (pr.regime()) {
            case Regime::Subcritical:
              cell.as_expected = r.status == SolveStatus::Converged && r.energy.I_p < 0.0;
              break;
            case Regime::LowerEndpoint: {
              const double e = 2.0 * (dim + alpha) / dim;
              cell.predicted =
                  -(dim / (2.0 * (dim + alpha))) * hls_sharp_constant(dim, alpha) * std::pow(cell.c, e);
              cell.as_expected = r.status == SolveStatus::Vanishing &&
                                 std::abs(cell.energy / *cell.predicted - 1.0) <= opts.lower_endpoint_tol;
              os << ", predicted infimum " << *cell.predicted;
              break;
            }
            case Regime::MassCritical: {
              const double ratio = c_star ? cell.c / *c_star : c_in;
              cell.as_expected = ratio < 1.0 ? r.status == SolveStatus::Vanishing && r.energy.I_p >= 0.0
                                             : r.status == SolveStatus::Blowup;
              break;
            }
            case Regime::Supercritical: break;
          }
          if (!r.diagnostics.empty()) os << ": " << r.diagnostics;
        }
      } catch (const Error& e) {
        os << "failed: " << e.what();
        cell.as_expected = false;
      }
      cell.behavior = os.str();
      out.push_back(std::move(cell));
    }
  }
  return out;
}

std::vector<SubadditivityRow> subadditivity_check(const ChoquardParams& params, double c,
                                                  std::span<const double> a_list,
                                                  const FlowOptions& opts, SpectralWorkspace& ws) {
  if (params.regime() != Regime::Subcritical)
    throw DomainError("subadditivity_check: requires (N+alpha)/N < p < (N+alpha+2)/N");
  for (double a : a_list)
    if (!(a > 0.0 && a < c)) throw DomainError("subadditivity_check: need 0 < a < c");
  const Field init = gaussian(ws.grid(), 1.0);
  auto solve = [&](double m) { return minimize_on_sphere(params, m, nullptr, init, opts, ws); };
  SolveReport rc = solve(c);
  std::vector<SubadditivityRow> out;
  for (double a : a_list) {
    SolveReport ra = solve(a);
    SolveReport rb = solve(std::sqrt(c * c - a * a));
    SubadditivityRow row;
    row.a = a;
    row.I_c = rc.energy.I_p;
    row.I_a = ra.energy.I_p;
    row.I_rest = rb.energy.I_p;
    row.margin = row.I_a + row.I_rest - row.I_c;
    // Energy error of a flow stopped at relative gradient r scales like r^2;
    // the band is kept well above that.
    row.tolerance = 1e-8 * (std::abs(row.I_a) + std::abs(row.I_rest) + std::abs(row.I_c));
    const bool ok = rc.status == SolveStatus::Converged && ra.status == SolveStatus::Converged &&
                    rb.status == SolveStatus::Converged;
    row.inconclusive = !ok || std::abs(row.margin) <= row.tolerance;
    row.holds = !row.inconclusive && row.margin > row.tolerance;
    out.push_back(row);
  }
  return out;
}

namespace {
int nearest_well(const PotentialSpec& vspec, std::span<const double> y, double box, bool& ambiguous) {
  int best = -1;
  double bd = kInf;
  for (std::size_t i = 0; i < vspec.wells().size(); ++i) {
    double d2 = 0.0;
    for (std::size_t d = 0; d < y.size(); ++d) {
      const double t = y[d] - vspec.wells()[i].center[d];
      d2 += t * t;
    }
    if (d2 < bd) {
      bd = d2;
      best = int(i);
    }
  }
  ambiguous = std::sqrt(bd) > box / 10.0;
  return best;
}

// Flow started from a Gaussian at every well; the lowest objective wins, ties
// going to the lower index.
struct MultiStart {
  SolveReport best;
  std::vector<double> energies;
};
MultiStart multi_start(const Model& model, const PotentialSpec& vspec, double c,
                       const FlowOptions& flow, SpectralWorkspace& ws) {
  std::optional<SolveReport> best;
  std::vector<double> energies;
  for (const Well& w : vspec.wells()) {
    SolveReport r = minimize_on_sphere(model, c, gaussian(ws.grid(), 1.0, w.center), flow, ws);
    energies.push_back(r.energy.objective());
    const bool usable = r.status == SolveStatus::Converged;
    const bool best_usable = best && best->status == SolveStatus::Converged;
    if (!best || (usable && !best_usable) ||
        (usable == best_usable && r.energy.objective() < best->energy.objective()))
      best = std::move(r);
  }
  return {std::move(*best), std::move(energies)};
}
}  // namespace

WellSelection well_selection_test(const ChoquardParams& params, const PotentialSpec& vspec,
                                  double c_ratio, const FlowOptions& flow,
                                  const PetviashviliOptions& gs, SpectralWorkspace& ws) {
  if (params.regime() != Regime::MassCritical)
    throw DomainError("well_selection_test: requires p = (N+alpha+2)/N");
  if (!(c_ratio > 0.0 && c_ratio < 1.0)) throw DomainError("well_selection_test: need 0 < c/c* < 1");
  const CriticalGroundstate cs = critical_groundstate(params, gs, ws);
  const Model model(params, evaluate_potential(vspec, ws.grid()), flow.scheme);
  MultiStart ms = multi_start(model, vspec, c_ratio * cs.c_star, flow, ws);
  WellSelection out{-1, {}, std::move(ms.energies), false, compute_lambdas(cs.w0, vspec, cs.c_star),
                    std::move(ms.best)};
  out.y_c = locate_center(out.best.field);
  out.selected = nearest_well(vspec, out.y_c, ws.grid().box_length(), out.ambiguous);
  return out;
}

Field cutoff_test_function(const Field& w0, double c, double t, std::span<const double> x0) {
  if (!(t > 0.0) || !(c > 0.0)) throw DomainError("cutoff_test_function: c and t must be positive");
  const Grid& g = w0.grid();
  // Smooth step: 1 on |x| <= 1, 0 on |x| >= 2.
  auto bump = [](double r) {
    if (r <= 1.0) return 1.0;
    if (r >= 2.0) return 0.0;
    auto f = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
    const double s = r - 1.0;
    return f(1.0 - s) / (f(1.0 - s) + f(s));
  };
  Field u = resample_affine(w0, g, t, x0);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= bump(std::sqrt(g.dist2(i, x0)));
  return normalize_mass(u, c);
}

ConcentrationReport concentration_study(const ConcentrationPlan& plan, SpectralWorkspace& ws) {
  const ChoquardParams& pr = plan.params;
  if (pr.regime() != Regime::MassCritical)
    throw DomainError("concentration_study: requires p = (N+alpha+2)/N");
  const int n = pr.dim();
  const double alpha = pr.alpha();
  if (n >= 3 && alpha < n - 2)
    throw DomainError("concentration_study: requires alpha >= N-2 for N >= 3");
  if (plan.c_ratios.empty()) throw DomainError("concentration_study: empty schedule");
  for (std::size_t i = 0; i < plan.c_ratios.size(); ++i) {
    const double r = plan.c_ratios[i];
    if (!(r > 0.0 && r < 1.0)) throw DomainError("concentration_study: c/c* must lie in (0, 1)");
    if (i > 0 && !(r > plan.c_ratios[i - 1]))
      throw DomainError("concentration_study: schedule must increase toward c*");
  }
  for (double s : plan.s_list) {
    const double hi = n > 2 ? (n + alpha) / (n - 2.0) : kInf;
    if (!(s >= (n + alpha) / n - 1e-12 && s < hi))
      throw DomainError("concentration_study: s must satisfy (N+alpha)/N <= s < (N+alpha)/(N-2)_+");
  }

  const Grid& g = ws.grid();
  const CriticalGroundstate cs = critical_groundstate(pr, plan.groundstate, ws);
  ConcentrationReport rep;
  rep.c_star = cs.c_star;
  rep.q = plan.vspec.q_max();
  rep.s_list = plan.s_list;
  rep.lambdas = compute_lambdas(cs.w0, plan.vspec, cs.c_star);
  const double q = rep.q;
  const double kl = std::pow((alpha + 2.0) / n, 1.0 / (q + 2.0)) * rep.lambdas.lambda;

  std::vector<double> cs_list;
  for (double r : plan.c_ratios) cs_list.push_back(r * cs.c_star);
  SweepOptions sweep = plan.sweep;
  if (!sweep.init && plan.vspec.wells().size() > 1) {
    const Model model(pr, evaluate_potential(plan.vspec, g), sweep.flow.scheme);
    sweep.init = multi_start(model, plan.vspec, cs_list.front(), sweep.flow, ws).best.field;
  }
  SweepRun run = run_sweep(pr, &plan.vspec, cs_list, sweep, ws);
  rep.records = std::move(run.records);

  rep.distances.assign(plan.s_list.size(), std::vector<double>(rep.records.size(), kNaN));
  for (std::size_t j = 0; j < rep.records.size(); ++j) {
    SweepRecord& rec = rep.records[j];
    const double delta = critical_delta(plan.c_ratios[j], n, alpha);
    rec.eps_q = std::pow(delta, 1.0 / (q + 2.0));
    if (rec.status != SolveStatus::Converged) {
      std::ostringstream os;
      os << "c/c* = " << plan.c_ratios[j] << ": " << to_string(rec.status) << " (" << rec.diagnostics
         << ")";
      rep.failures.push_back(os.str());
      continue;
    }
    Field u = run.fields[j];
    if (pairwise_sum(u.values()) < 0.0) u *= -1.0;
    const double eps = rec.eps_q;
    // Distance of eps^{N/2} u(eps x + y) to the limit profile, evaluated on
    // the original grid: for r = 2Ns/(N+alpha) it equals eps^{N/2 - N/r} ||u - P||_r.
    Field pred = resample_affine(cs.w0, g, kl / eps, rec.y_c);
    pred *= std::pow(kl / eps, 0.5 * n);
    Field diff = u - pred;
    for (std::size_t k = 0; k < plan.s_list.size(); ++k) {
      const double r = 2.0 * n * plan.s_list[k] / (n + alpha);
      rep.distances[k][j] = std::pow(eps, 0.5 * n - n / r) * lp_norm(diff, r);
    }
  }

  bool amb = false;
  for (auto it = rep.records.rbegin(); it != rep.records.rend(); ++it)
    if (it->status == SolveStatus::Converged) {
      rep.selected_well = nearest_well(plan.vspec, it->y_c, g.box_length(), amb);
      break;
    }
  if (amb) rep.failures.push_back("final center is not near any well");

  // Fits on the last decade of delta among converged points.
  std::vector<double> xs, es, as;
  double dmin = kInf;
  for (std::size_t j = 0; j < rep.records.size(); ++j)
    if (rep.records[j].status == SolveStatus::Converged)
      dmin = std::min(dmin, critical_delta(plan.c_ratios[j], n, alpha));
  for (std::size_t j = 0; j < rep.records.size(); ++j) {
    const double d = critical_delta(plan.c_ratios[j], n, alpha);
    if (rep.records[j].status != SolveStatus::Converged || d > 10.0 * dmin * (1.0 + 1e-9)) continue;
    xs.push_back(d);
    es.push_back(rep.records[j].energy);
    as.push_back(rep.records[j].A);
  }
  const double pref = (q + 2.0) / q * 0.5 * rep.lambdas.lambda * rep.lambdas.lambda * cs.c_star *
                      cs.c_star * std::pow(n / (alpha + 2.0), q / (q + 2.0));
  try {
    rep.energy_fit = fit_power_law(xs, es);
    set_theory(rep.energy_fit, q / (q + 2.0), pref);
    rep.kinetic_fit = fit_power_law(xs, as);
    set_theory(rep.kinetic_fit, -2.0 / (q + 2.0));
  } catch (const DomainError& e) {
    rep.failures.push_back(std::string("fit skipped: ") + e.what());
  }

  // Prefactor e_c / eps_q^q at the smallest delta.
  for (std::size_t j = rep.records.size(); j-- > 0;) {
    const SweepRecord& rec = rep.records[j];
    if (rec.status != SolveStatus::Converged) continue;
    rep.prefactor.exponent = kNaN;
    rep.prefactor.prefactor = rec.energy / std::pow(rec.eps_q, q);
    rep.prefactor.theory_prefactor = pref;
    rep.prefactor.prefactor_dev = std::abs(rep.prefactor.prefactor - pref) / pref;
    rep.prefactor.x_min = rep.prefactor.x_max = critical_delta(plan.c_ratios[j], n, alpha);
    rep.prefactor.xs = {rep.prefactor.x_min};
    rep.prefactor.ys = {rep.prefactor.prefactor};

    const int well = rep.lambdas.attaining.empty() ? 0 : rep.lambdas.attaining.front();
    const auto& x0 = plan.vspec.wells()[well].center;
    const double t = 1.0 / rec.eps_q;
    Field tf = cutoff_test_function(cs.w0, rec.c, t, x0);
    const double e_tf =
        energy(tf, Model(pr, evaluate_potential(plan.vspec, g), sweep.flow.scheme), ws).objective();
    rep.witness = UpperBoundWitness{rec.c, t, e_tf, rec.energy};
    break;
  }
  return rep;
}

}  // namespace chq
