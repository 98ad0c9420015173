#include "chq/spectral.hpp"

#include <fftw3.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <mutex>
#include <numbers>

namespace chq {

namespace {
// FFTW's planner is not thread-safe; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t half_length(std::span<const int> dims) {
  std::size_t n = 1;
  for (std::size_t d = 0; d + 1 < dims.size(); ++d) n *= static_cast<std::size_t>(dims[d]);
  return n * static_cast<std::size_t>(dims.back() / 2 + 1);
}

std::size_t full_length(std::span<const int> dims) {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

int wrapped(int i, int n) { return i <= n / 2 ? i : i - n; }

// Squared integer frequency |n|^2 of every half-spectrum entry.
std::vector<double> half_spectrum_n2(std::span<const int> dims) {
  std::vector<double> out(half_length(dims));
  const int rank = static_cast<int>(dims.size());
  const int last = dims.back() / 2 + 1;
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    std::size_t rem = flat;
    double n2 = 0.0;
    int k = static_cast<int>(rem % last);
    rem /= last;
    n2 += double(k) * k;
    for (int d = rank - 2; d >= 0; --d) {
      int i = static_cast<int>(rem % dims[d]);
      rem /= dims[d];
      int w = wrapped(i, dims[d]);
      n2 += double(w) * w;
    }
    out[flat] = n2;
  }
  return out;
}
}  // namespace

namespace detail {
class FftPair {
 public:
  explicit FftPair(std::vector<int> dims) : dims_(std::move(dims)) {
    n_real_ = full_length(dims_);
    n_cplx_ = half_length(dims_);
    real_ = fftw_alloc_real(n_real_);
    cplx_ = fftw_alloc_complex(n_cplx_);
    std::lock_guard lock(planner_mutex());
    const int rank = static_cast<int>(dims_.size());
    fwd_ = fftw_plan_dft_r2c(rank, dims_.data(), real_, cplx_, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_c2r(rank, dims_.data(), cplx_, real_, FFTW_ESTIMATE);
  }
  ~FftPair() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(real_);
    fftw_free(cplx_);
  }
  FftPair(const FftPair&) = delete;
  FftPair& operator=(const FftPair&) = delete;

  std::size_t real_size() const { return n_real_; }
  std::size_t cplx_size() const { return n_cplx_; }

  std::vector<std::complex<double>> forward(std::span<const double> in) {
    if (in.size() != n_real_) throw DomainError("fft: input size mismatch");
    std::copy(in.begin(), in.end(), real_);
    fftw_execute(fwd_);
    std::vector<std::complex<double>> out(n_cplx_);
    for (std::size_t i = 0; i < n_cplx_; ++i) out[i] = {cplx_[i][0], cplx_[i][1]};
    return out;
  }

  std::vector<double> inverse(std::span<const std::complex<double>> in) {
    if (in.size() != n_cplx_) throw DomainError("fft: input size mismatch");
    for (std::size_t i = 0; i < n_cplx_; ++i) {
      cplx_[i][0] = in[i].real();
      cplx_[i][1] = in[i].imag();
    }
    fftw_execute(bwd_);
    const double scale = 1.0 / static_cast<double>(n_real_);
    std::vector<double> out(n_real_);
    for (std::size_t i = 0; i < n_real_; ++i) out[i] = real_[i] * scale;
    return out;
  }

 private:
  std::vector<int> dims_;
  std::size_t n_real_ = 0;
  std::size_t n_cplx_ = 0;
  double* real_ = nullptr;
  fftw_complex* cplx_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};
}  // namespace detail

double riesz_constant(int dim, double alpha) {
  using std::numbers::pi;
  return std::tgamma(0.5 * (dim - alpha)) /
         (std::tgamma(0.5 * alpha) * std::pow(pi, 0.5 * dim) * std::pow(2.0, alpha));
}

SpectralWorkspace::SpectralWorkspace(const Grid& g) : grid_(g) {
  const int m = g.points_per_axis();
  std::vector<int> dims(g.dim(), m);
  std::vector<int> pdims(g.dim(), 2 * m);
  fft_ = std::make_unique<detail::FftPair>(dims);
  fft_padded_ = std::make_unique<detail::FftPair>(pdims);

  const double two_pi_over_l = 2.0 * std::numbers::pi / g.box_length();
  lap_symbol_ = half_spectrum_n2(dims);
  for (double& v : lap_symbol_) v *= two_pi_over_l * two_pi_over_l;

  half_weights_.resize(fft_->cplx_size());
  const int last = m / 2 + 1;
  for (std::size_t i = 0; i < half_weights_.size(); ++i) {
    int k = static_cast<int>(i % last);
    half_weights_[i] = (k == 0 || k == m / 2) ? 1.0 : 2.0;
  }
}

SpectralWorkspace::~SpectralWorkspace() = default;
SpectralWorkspace::SpectralWorkspace(SpectralWorkspace&&) noexcept = default;
SpectralWorkspace& SpectralWorkspace::operator=(SpectralWorkspace&&) noexcept = default;

std::size_t SpectralWorkspace::half_size() const { return fft_->cplx_size(); }
std::size_t SpectralWorkspace::padded_size() const { return fft_padded_->real_size(); }
std::size_t SpectralWorkspace::padded_half_size() const { return fft_padded_->cplx_size(); }

std::vector<std::complex<double>> SpectralWorkspace::forward(std::span<const double> in) {
  return fft_->forward(in);
}
std::vector<double> SpectralWorkspace::inverse(std::span<const std::complex<double>> in) {
  return fft_->inverse(in);
}
std::vector<std::complex<double>> SpectralWorkspace::forward_padded(std::span<const double> in) {
  return fft_padded_->forward(in);
}
std::vector<double> SpectralWorkspace::inverse_padded(std::span<const std::complex<double>> in) {
  return fft_padded_->inverse(in);
}

const std::vector<double>& SpectralWorkspace::periodic_riesz_symbol(double alpha) {
  auto it = periodic_riesz_.find(alpha);
  if (it != periodic_riesz_.end()) return it->second;
  std::vector<double> sym = lap_symbol_;
  for (double& v : sym) v = v > 0.0 ? std::pow(v, -0.5 * alpha) : 0.0;
  return periodic_riesz_.emplace(alpha, std::move(sym)).first->second;
}

SpectralWorkspace::FreeTables& SpectralWorkspace::free_tables(double alpha) {
  auto it = free_.find(alpha);
  if (it != free_.end()) return it->second;

  using boost::math::gamma_p;
  using std::numbers::pi;
  const int n = grid_.dim();
  const int m = grid_.points_per_axis();
  const double h = grid_.spacing();
  const double eta = splitting_width();
  const double c = riesz_constant(n, alpha);
  const double s = 0.5 * (n - alpha);

  // Smooth long-range part c r^(alpha-N) P(s, r^2/eta^2), sampled on the
  // padded grid; displacement index i <-> i (i < M) or i - 2M.
  Grid padded(n, 2 * m, 2.0 * grid_.box_length());
  std::vector<double> k_long(padded.size());
  const double k0 = c * std::pow(eta, alpha - n) / std::tgamma(s + 1.0);
  for (std::size_t flat = 0; flat < padded.size(); ++flat) {
    auto idx = padded.unflatten(flat);
    double r2 = 0.0;
    for (int d = 0; d < n; ++d) {
      int w = idx[d] < m ? idx[d] : idx[d] - 2 * m;
      r2 += double(w) * w;
    }
    r2 *= h * h;
    k_long[flat] = r2 == 0.0 ? k0 : c * std::pow(r2, -s) * gamma_p(s, r2 / (eta * eta));
  }

  FreeTables tables;
  tables.hat = fft_padded_->forward(k_long);
  const double wcell = grid_.cell_weight();
  std::vector<int> pdims(n, 2 * m);
  auto n2 = half_spectrum_n2(pdims);
  const double dxi = 1.0 / padded.box_length();
  const double short0 = std::pow(0.5 * eta, alpha) / std::tgamma(0.5 * alpha + 1.0);
  for (std::size_t i = 0; i < tables.hat.size(); ++i) {
    double xi = std::sqrt(n2[i]) * dxi;
    double short_hat =
        xi == 0.0 ? short0
                  : std::pow(2.0 * pi * xi, -alpha) * gamma_p(0.5 * alpha, pi * pi * xi * xi * eta * eta);
    tables.hat[i] = wcell * tables.hat[i] + short_hat;
  }
  tables.real = fft_padded_->inverse(tables.hat);
  for (double& v : tables.real) v /= wcell;
  if (fault_ != 0.0) tables.hat[tables.hat.size() / 3] *= 1.0 + fault_;
  return free_.emplace(alpha, std::move(tables)).first->second;
}

const std::vector<std::complex<double>>& SpectralWorkspace::free_space_kernel_hat(double alpha) {
  return free_tables(alpha).hat;
}

const std::vector<double>& SpectralWorkspace::free_space_kernel(double alpha) {
  return free_tables(alpha).real;
}

namespace {
void check_alpha(const Grid& g, double alpha) {
  if (!(alpha > 0.0 && alpha < g.dim()))
    throw DomainError("riesz: alpha must lie in (0, N)");
}
void check_grid(const Field& f, const SpectralWorkspace& ws) {
  if (f.grid() != ws.grid()) throw DomainError("field grid does not match workspace grid");
}

// A sample on the x_d = -L/2 plane stands for the periodic point shared with
// +L/2, so it is split evenly between padded index 0 and index M on that axis.
// Reading back averages the same images, which keeps the operator symmetric
// under x -> -x and self-adjoint.
template <class Visit>
void for_each_image(const Grid& g, const Grid& p, std::size_t i, Visit&& visit) {
  const int m = g.points_per_axis();
  auto idx = g.unflatten(i);
  int edge_axes[3];
  int n_edge = 0;
  for (int d = 0; d < g.dim(); ++d)
    if (idx[d] == 0) edge_axes[n_edge++] = d;
  const double w = 1.0 / (1 << n_edge);
  for (int mask = 0; mask < (1 << n_edge); ++mask) {
    auto img = idx;
    for (int k = 0; k < n_edge; ++k)
      if (mask & (1 << k)) img[edge_axes[k]] = m;
    visit(p.flatten(img), w);
  }
}

std::vector<double> pad(const Field& f) {
  const Grid& g = f.grid();
  Grid p(g.dim(), 2 * g.points_per_axis(), 2.0 * g.box_length());
  std::vector<double> out(p.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i)
    for_each_image(g, p, i, [&](std::size_t k, double w) { out[k] += w * f[i]; });
  return out;
}

Field crop(const Grid& g, const std::vector<double>& padded) {
  Grid p(g.dim(), 2 * g.points_per_axis(), 2.0 * g.box_length());
  Field out(g);
  for (std::size_t i = 0; i < g.size(); ++i)
    for_each_image(g, p, i, [&](std::size_t k, double w) { out[i] += w * padded[k]; });
  return out;
}

Field apply_symbol(const Field& f, const std::vector<double>& sym, SpectralWorkspace& ws) {
  auto hat = ws.forward(f.values());
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= sym[i];
  return Field(f.grid(), ws.inverse(hat));
}
}  // namespace

Field riesz_convolve(const Field& f, const RieszOptions& opts, SpectralWorkspace& ws) {
  check_grid(f, ws);
  check_alpha(f.grid(), opts.alpha);
  if (opts.scheme == RieszScheme::Periodic)
    return apply_symbol(f, ws.periodic_riesz_symbol(opts.alpha), ws);

  const auto& khat = ws.free_space_kernel_hat(opts.alpha);
  auto hat = ws.forward_padded(pad(f));
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= khat[i];
  return crop(f.grid(), ws.inverse_padded(hat));
}

Field laplacian_apply(const Field& f, SpectralWorkspace& ws) {
  check_grid(f, ws);
  return apply_symbol(f, ws.laplacian_symbol(), ws);
}

Field inverse_helmholtz(const Field& f, double b, SpectralWorkspace& ws) {
  check_grid(f, ws);
  if (!(b > 0.0)) throw DomainError("inverse_helmholtz: b must be positive");
  std::vector<double> sym = ws.laplacian_symbol();
  for (double& v : sym) v = 1.0 / (v + b);
  return apply_symbol(f, sym, ws);
}

double lp_norm(const Field& f, double r) {
  if (!(r >= 1.0)) throw DomainError("lp_norm: r must be >= 1");
  std::vector<double> t(f.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::pow(std::abs(f[i]), r);
  return std::pow(f.grid().cell_weight() * pairwise_sum(t), 1.0 / r);
}

double inner(const Field& f, const Field& g) {
  if (f.grid() != g.grid()) throw DomainError("inner: grid mismatch");
  std::vector<double> t(f.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = f[i] * g[i];
  return f.grid().cell_weight() * pairwise_sum(t);
}

double mass(const Field& f) { return inner(f, f); }

double boundary_mass(const Field& f) {
  const Grid& g = f.grid();
  const double edge = 0.45 * g.box_length();
  std::vector<double> all(f.size()), shell(f.size(), 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    all[i] = f[i] * f[i];
    auto idx = g.unflatten(i);
    for (int d = 0; d < g.dim(); ++d) {
      if (std::abs(g.coord(idx[d])) >= edge) {
        shell[i] = all[i];
        break;
      }
    }
  }
  double total = pairwise_sum(all);
  return total > 0.0 ? pairwise_sum(shell) / total : 0.0;
}

double spectral_mass(const Field& f, SpectralWorkspace& ws) {
  check_grid(f, ws);
  auto hat = ws.forward(f.values());
  const auto& w = ws.half_weights();
  std::vector<double> t(hat.size());
  for (std::size_t i = 0; i < hat.size(); ++i) t[i] = w[i] * std::norm(hat[i]);
  const double n = static_cast<double>(f.size());
  return f.grid().cell_weight() * pairwise_sum(t) / n;
}

namespace {
// Row i: weights of the source samples for the value at target point i.
std::vector<double> interpolation_matrix(const Grid& src, const Grid& dst, double scale,
                                         double shift) {
  const int ms = src.points_per_axis();
  const int mt = dst.points_per_axis();
  const double ls = src.box_length();
  std::vector<double> w(static_cast<std::size_t>(mt) * ms, 0.0);
  for (int i = 0; i < mt; ++i) {
    const double z = scale * (dst.coord(i) - shift);
    if (z < -0.5 * ls || z > 0.5 * ls) continue;
    for (int j = 0; j < ms; ++j) {
      const double half = std::numbers::pi * (z - src.coord(j)) / ls;
      const double sn = std::sin(half);
      double v;
      if (std::abs(sn) < 1e-15)
        v = 1.0;
      else
        v = std::sin(ms * half) * std::cos(half) / (sn * ms);
      w[static_cast<std::size_t>(i) * ms + j] = v;
    }
  }
  return w;
}
}  // namespace

Field resample_affine(const Field& f, const Grid& target, double scale,
                      std::span<const double> shift) {
  const Grid& src = f.grid();
  if (src.dim() != target.dim()) throw DomainError("resample: dimension mismatch");
  if (!(scale > 0.0)) throw DomainError("resample: scale must be positive");
  const int n = src.dim();
  std::vector<double> cur(f.values().begin(), f.values().end());
  std::vector<int> dims(n, src.points_per_axis());
  for (int axis = 0; axis < n; ++axis) {
    double sh = axis < static_cast<int>(shift.size()) ? shift[axis] : 0.0;
    auto w = interpolation_matrix(src, target, scale, sh);
    const int ms = dims[axis];
    const int mt = target.points_per_axis();
    std::size_t outer = 1, inner_n = 1;
    for (int d = 0; d < axis; ++d) outer *= dims[d];
    for (int d = axis + 1; d < n; ++d) inner_n *= dims[d];
    std::vector<double> next(outer * mt * inner_n, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      for (int i = 0; i < mt; ++i) {
        const double* row = &w[static_cast<std::size_t>(i) * ms];
        double* dst = &next[(o * mt + i) * inner_n];
        for (int j = 0; j < ms; ++j) {
          const double wij = row[j];
          if (wij == 0.0) continue;
          const double* s = &cur[(o * ms + j) * inner_n];
          for (std::size_t k = 0; k < inner_n; ++k) dst[k] += wij * s[k];
        }
      }
    }
    cur = std::move(next);
    dims[axis] = mt;
  }
  return Field(target, std::move(cur));
}

}  // namespace chq
