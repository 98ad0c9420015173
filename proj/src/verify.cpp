#include "chq/verify.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace chq {

Field direct_convolution_oracle(const Field& f, double alpha, SpectralWorkspace& ws) {
  const Grid& g = f.grid();
  if (g != ws.grid()) throw DomainError("field grid does not match workspace grid");
  if (g.points_per_axis() > kDirectOracleMaxPoints)
    throw DomainError("direct_convolution_oracle: at most 16 points per axis");
  const int n = g.dim();
  const int m = g.points_per_axis();
  const std::vector<double>& k = ws.free_space_kernel(alpha);

  // Positions in padded index space: a coordinate 0 also appears at m with
  // half the weight, matching the periodic-point convention of the solver.
  struct Image {
    std::array<int, 3> at;
    double w;
  };
  auto images = [&](std::size_t i) {
    std::vector<Image> out{{g.unflatten(i), 1.0}};
    for (int d = 0; d < n; ++d) {
      if (out.front().at[d] != 0) continue;
      std::vector<Image> next;
      for (Image im : out) {
        im.w *= 0.5;
        next.push_back(im);
        im.at[d] = m;
        next.push_back(im);
      }
      out = std::move(next);
    }
    return out;
  };
  std::vector<std::vector<Image>> all(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) all[i] = images(i);

  const int p = 2 * m;
  Field out(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double acc = 0.0;
    for (const Image& t : all[i])
      for (std::size_t j = 0; j < g.size(); ++j)
        for (const Image& s : all[j]) {
          std::size_t flat = 0;
          for (int d = 0; d < n; ++d) flat = flat * p + static_cast<std::size_t>(((t.at[d] - s.at[d]) % p + p) % p);
          acc += t.w * s.w * k[flat] * f[j];
        }
    out[i] = g.cell_weight() * acc;
  }
  return out;
}

std::vector<double> newtonian_gaussian_oracle(std::span<const double> radii, double sigma) {
  using boost::math::quadrature::gauss_kronrod;
  if (!(sigma > 0.0)) throw DomainError("newtonian_gaussian_oracle: sigma must be positive");
  auto g = [sigma](double s) { return std::exp(-0.5 * s * s / (sigma * sigma)); };
  // c_{3,2} = 1/(4 pi); the shell theorem gives
  // phi(r) = (1/r) int_0^r s^2 g(s) ds + int_r^inf s g(s) ds.
  std::vector<double> out;
  for (double r : radii) {
    if (!(r >= 0.0)) throw DomainError("newtonian_gaussian_oracle: radii must be nonnegative");
    double err_out = 0.0, err_in = 0.0;
    const double outer = gauss_kronrod<double, 61>::integrate(
        [&](double s) { return s * g(s); }, r, std::numeric_limits<double>::infinity(), 15, 1e-15,
        &err_out);
    double inner = 0.0;
    if (r > 0.0)
      inner = gauss_kronrod<double, 61>::integrate([&](double s) { return s * s * g(s); }, 0.0, r, 15,
                                                   1e-15, &err_in) / r;
    const double v = inner + outer;
    if (err_out + err_in / std::max(r, 1e-300) > 1e-10 * std::abs(v))
      throw Error("newtonian_gaussian_oracle: quadrature did not converge at r = " + std::to_string(r));
    out.push_back(v);
  }
  return out;
}

double hls_sharp_constant(int dim, double alpha) {
  if (dim < 1 || !(alpha > 0.0 && alpha < dim)) throw DomainError("hls_sharp_constant: need 0 < alpha < N");
  using std::numbers::pi;
  const double n = dim;
  const double lam = n - alpha;
  const double lieb = std::pow(pi, 0.5 * lam) * std::tgamma(0.5 * n - 0.5 * lam) /
                      std::tgamma(n - 0.5 * lam) *
                      std::pow(std::tgamma(0.5 * n) / std::tgamma(n), -1.0 + lam / n);
  return riesz_constant(dim, alpha) * lieb;
}

Field random_smooth_field(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double l = g.box_length();
  const int bumps = 3;
  Field f(g);
  for (int b = 0; b < bumps; ++b) {
    std::vector<double> c(g.dim());
    for (double& x : c) x = (unit(rng) - 0.5) * 0.2 * l;
    const double w = (0.04 + 0.04 * unit(rng)) * l;
    const double a = unit(rng) < 0.25 ? -(0.2 + unit(rng)) : 0.5 + unit(rng);
    f.axpy(a, gaussian(g, w, c));
  }
  return f;
}

namespace {
double rel_linf(const Field& a, const Field& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den > 0.0 ? num / den : num;
}

OracleReport make(std::string name, double err, double tol, std::string input) {
  return {std::move(name), err, tol, std::isfinite(err) && err <= tol, std::move(input)};
}

template <class F>
void guarded(std::vector<OracleReport>& out, const std::string& name, const std::string& input, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    out.push_back({name, std::numeric_limits<double>::infinity(), 0.0, false, input + "; " + e.what()});
  }
}

void convolution_checks(std::vector<OracleReport>& out, const SuiteOptions& opts) {
  const struct {
    int n;
    double alpha;
  } cases[] = {{1, 0.5}, {2, 1.0}};
  for (auto c : cases) {
    std::ostringstream in;
    in << "N=" << c.n << " alpha=" << c.alpha << " M=16 L=8 random smooth field";
    const std::string name = "convolution_direct_N" + std::to_string(c.n);
    guarded(out, name, in.str(), [&] {
      Grid g(c.n, 16, 8.0);
      SpectralWorkspace ws(g);
      if (opts.inject_kernel_fault) ws.inject_kernel_fault(1e-3);
      std::mt19937_64 rng(1234 + c.n);
      Field f = random_smooth_field(g, rng);
      Field fast = riesz_convolve(f, {RieszScheme::FreeSpace, c.alpha}, ws);
      out.push_back(make(name, rel_linf(fast, direct_convolution_oracle(f, c.alpha, ws)), 1e-12, in.str()));
    });
  }
  const std::string in = "N=3 alpha=2 M=64 L=16 Gaussian sigma=1";
  guarded(out, "newtonian_gaussian", in, [&] {
    Grid g(3, 64, 16.0);
    SpectralWorkspace ws(g);
    if (opts.inject_kernel_fault) ws.inject_kernel_fault(1e-3);
    Field f = gaussian(g, 1.0);
    Field phi = riesz_convolve(f, {RieszScheme::FreeSpace, 2.0}, ws);
    // Radii repeat: r^2 / h^2 is an integer, so each distinct value is integrated once.
    const int m = g.points_per_axis();
    std::vector<long> key(g.size());
    std::vector<char> seen(3 * (m / 2) * (m / 2) + 1, 0);
    std::vector<double> radii;
    std::vector<long> order;
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto idx = g.unflatten(i);
      long k2 = 0;
      for (int d = 0; d < 3; ++d) {
        long j = idx[d] - m / 2;
        k2 += j * j;
      }
      key[i] = k2;
      if (!seen[k2]) {
        seen[k2] = 1;
        order.push_back(k2);
        radii.push_back(g.spacing() * std::sqrt(double(k2)));
      }
    }
    std::vector<double> vals = newtonian_gaussian_oracle(radii, 1.0);
    std::vector<double> lookup(seen.size(), 0.0);
    for (std::size_t k = 0; k < order.size(); ++k) lookup[order[k]] = vals[k];
    Field ref(g);
    for (std::size_t i = 0; i < g.size(); ++i) ref[i] = lookup[key[i]];
    out.push_back(make("newtonian_gaussian", rel_linf(phi, ref), 1e-6, in));
  });
}

void gradient_checks(std::vector<OracleReport>& out) {
  const std::string in = "N=1 alpha=0.5 p=2 M=256 L=40, V=|x|^2, 3 random fields, eps=1e-5";
  for (bool with_v : {false, true}) {
    const std::string name = with_v ? "gradient_fd_E" : "gradient_fd_I";
    guarded(out, name, in, [&] {
      Grid g(1, 256, 40.0);
      SpectralWorkspace ws(g);
      ChoquardParams pr(1, 0.5, 2.0);
      PotentialSpec v(1, {Well{{0.0}, 1.0, 2.0}});
      std::optional<Field> vf;
      if (with_v) vf = evaluate_potential(v, g);
      Model model(pr, vf);
      std::mt19937_64 rng(99);
      double worst = 0.0;
      const double eps = 1e-5;
      for (int k = 0; k < 3; ++k) {
        Field u = random_smooth_field(g, rng);
        Field dir = random_smooth_field(g, rng);
        const double exact = inner(gradient(u, model, ws), dir);
        Field up = u, dn = u;
        up.axpy(eps, dir);
        dn.axpy(-eps, dir);
        const double fd =
            (energy(up, model, ws).objective() - energy(dn, model, ws).objective()) / (2.0 * eps);
        worst = std::max(worst, std::abs(fd - exact) / std::max(std::abs(exact), 1e-300));
      }
      out.push_back(make(name, worst, 1e-6, in));
    });
  }
}

void dilation_checks(std::vector<OracleReport>& out) {
  const std::string in = "N=1 alpha=0.5 p=2 M=1024 L=80 Gaussian width 1, t in {0.5, 2}";
  guarded(out, "dilation_laws", in, [&] {
    Grid g(1, 1024, 80.0);
    SpectralWorkspace ws(g);
    ChoquardParams pr(1, 0.5, 2.0);
    Field u = gaussian(g, 1.0);
    auto e0 = energy(u, Model(pr), ws);
    double mass_err = 0.0, law_err = 0.0;
    for (double t : {0.5, 2.0}) {
      auto e = energy(dilate(u, t, ws), Model(pr), ws);
      mass_err = std::max(mass_err, std::abs(e.mass_sq / e0.mass_sq - 1.0));
      law_err = std::max(law_err, std::abs(e.A / (t * t * e0.A) - 1.0));
      law_err = std::max(law_err, std::abs(e.B / (std::pow(t, pr.b_dilation_exponent()) * e0.B) - 1.0));
    }
    out.push_back(make("dilation_mass", mass_err, 1e-10, in));
    out.push_back(make("dilation_scaling", law_err, 1e-6, in));
  });
}

void groundstate_checks(std::vector<OracleReport>& out) {
  const struct {
    int n;
    double alpha;
    bool critical;
    int m;
    double l;
  } cases[] = {{1, 0.5, false, 1024, 80.0}, {1, 0.5, true, 1024, 80.0},
               {2, 1.0, false, 256, 40.0},  {2, 1.0, true, 256, 40.0}};
  for (auto c : cases) {
    Grid g(c.n, c.m, c.l);
    ChoquardParams pr = c.critical ? ChoquardParams::mass_critical(c.n, c.alpha)
                                   : ChoquardParams(c.n, c.alpha, 2.0);
    std::ostringstream in;
    in << "N=" << c.n << " alpha=" << c.alpha << " p=" << pr.p() << " " << g.describe();
    const std::string tag = "_N" + std::to_string(c.n) + (c.critical ? "_pc" : "_p2");
    guarded(out, "groundstate" + tag, in.str(), [&] {
      SpectralWorkspace ws(g);
      SolveReport r = petviashvili_solve(pr, {}, ws);
      if (r.status != SolveStatus::Converged) throw Error("groundstate did not converge: " + r.diagnostics);
      out.push_back(make("pohozaev" + tag, pohozaev_residual(r.field, pr, ws), 1e-5, in.str()));
      Field q = rescale_unit_to_Qp(r.field, pr, ws);
      auto e = energy(q, Model(pr), ws);
      const double three = std::max(std::abs(e.A - e.B / pr.p()), std::abs(e.A - e.mass_sq)) / e.A;
      out.push_back(make("qp_identity" + tag, three, 1e-4, in.str()));
      if (c.critical) {
        out.push_back(make("virial" + tag, virial_residual_critical(r.field, pr, ws), 1e-5, in.str()));
        auto w = energy(r.field, Model(pr), ws);
        const double f = 0.5 * (w.A + w.mass_sq) - w.B / (2.0 * pr.p());
        const double cs = critical_mass(pr, {}, ws);
        const double err = std::max(std::abs(f / (0.5 * w.mass_sq) - 1.0),
                                    std::abs(w.mass_sq / (cs * cs) - 1.0));
        out.push_back(make("critical_mass_identity" + tag, err, 1e-4, in.str()));
      }
    });
  }
}

void hls_checks(std::vector<OracleReport>& out) {
  const std::string in = "N=1 alpha=0.5 p=1.5 M=1024 L=80 Gaussians width 1 and 2, amplitude 3";
  guarded(out, "hls_invariance", in, [&] {
    Grid g(1, 1024, 80.0);
    SpectralWorkspace ws(g);
    auto pr = ChoquardParams::lower_endpoint(1, 0.5);
    Field u1 = gaussian(g, 1.0);
    Field u2 = gaussian(g, 2.0);
    Field u3 = 3.0 * u1;
    const double r1 = hls_ratio(u1, pr, ws);
    const double err = std::max(std::abs(hls_ratio(u2, pr, ws) / r1 - 1.0),
                                std::abs(hls_ratio(u3, pr, ws) / r1 - 1.0));
    out.push_back(make("hls_invariance", err, 1e-8, in));
    out.push_back(make("hls_below_sharp", std::max(0.0, r1 / hls_sharp_constant(1, 0.5) - 1.0), 0.0, in));
  });
}
}  // namespace

std::vector<OracleReport> run_suite(const SuiteOptions& opts) {
  std::vector<OracleReport> out;
  convolution_checks(out, opts);
  gradient_checks(out);
  dilation_checks(out);
  groundstate_checks(out);
  hls_checks(out);
  return out;
}

bool all_pass(const std::vector<OracleReport>& reports) {
  for (const auto& r : reports)
    if (!r.pass) return false;
  return !reports.empty();
}

std::string to_jsonl(const OracleReport& r) {
  nlohmann::ordered_json j;
  j["oracle"] = r.oracle;
  if (std::isfinite(r.max_rel_err))
    j["max_rel_err"] = r.max_rel_err;
  else
    j["max_rel_err"] = nullptr;
  j["tol"] = r.tol;
  j["pass"] = r.pass;
  j["input"] = r.input;
  return j.dump();
}

}  // namespace chq
