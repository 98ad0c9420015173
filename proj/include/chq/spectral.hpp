#pragma once

// Transforms and spectral operators on a Grid.
//
// Fourier convention: f^(xi) = \int f(x) exp(-2 pi i x.xi) dx, so -Laplace has
// symbol (2 pi |xi|)^2 and the Riesz potential I_alpha has symbol
// (2 pi |xi|)^(-alpha). Discrete frequencies on the box are xi = n / L.

#include <complex>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "chq/grid.hpp"

namespace chq {

/// c_{N,alpha} = Gamma((N-alpha)/2) / (Gamma(alpha/2) pi^{N/2} 2^alpha).
double riesz_constant(int dim, double alpha);

enum class RieszScheme { Periodic, FreeSpace };

struct RieszOptions {
  RieszScheme scheme = RieszScheme::FreeSpace;
  double alpha = 1.0;
};

namespace detail {
class FftPair;
}

/// Owns FFT plans, buffers and cached multiplier tables for one Grid.
///
/// A workspace is single-owner: it carries mutable scratch buffers, so one
/// instance must never be shared between concurrent computations.
///
/// FreeSpace kernel: the Riesz kernel c|x|^(alpha-N) is split with the
/// incomplete gamma function into a smooth long-range part, sampled in real
/// space on the zero-padded (2M)^N grid, and a short-range singular part whose
/// continuous Fourier transform (2 pi|xi|)^(-alpha) P(alpha/2, (pi |xi| eta)^2)
/// is sampled directly. The splitting width is eta = 4h. The sum of both is a
/// single discrete kernel K_d, and riesz_convolve computes
/// h^N sum_y K_d(x - y) f(y) exactly (up to FFT roundoff).
class SpectralWorkspace {
 public:
  explicit SpectralWorkspace(const Grid& g);
  ~SpectralWorkspace();
  SpectralWorkspace(SpectralWorkspace&&) noexcept;
  SpectralWorkspace& operator=(SpectralWorkspace&&) noexcept;
  SpectralWorkspace(const SpectralWorkspace&) = delete;
  SpectralWorkspace& operator=(const SpectralWorkspace&) = delete;

  const Grid& grid() const { return grid_; }

  /// Splitting width of the free-space kernel.
  double splitting_width() const { return 4.0 * grid_.spacing(); }

  /// (2 pi |xi|)^2 on the half spectrum of the M^N grid.
  const std::vector<double>& laplacian_symbol() const { return lap_symbol_; }
  /// (2 pi |xi|)^(-alpha) with the zero mode set to 0, half spectrum of M^N.
  const std::vector<double>& periodic_riesz_symbol(double alpha);
  /// Transform table of the free-space kernel on the (2M)^N half spectrum.
  const std::vector<std::complex<double>>& free_space_kernel_hat(double alpha);
  /// Real-space discrete kernel K_d on the (2M)^N grid, indexed by wrapped
  /// displacement (index i <-> displacement i if i < M else i - 2M).
  const std::vector<double>& free_space_kernel(double alpha);

  /// Test hook: multiply one entry of every subsequently built free-space
  /// transform table by (1 + amount). The real-space kernel is left intact.
  void inject_kernel_fault(double amount) { fault_ = amount; }

  // Raw transform access; operators are implemented on top of these.
  std::size_t half_size() const;         // M-grid half spectrum length
  std::size_t padded_size() const;       // (2M)^N
  std::size_t padded_half_size() const;  // (2M)^N half spectrum length
  std::vector<std::complex<double>> forward(std::span<const double> in);
  std::vector<double> inverse(std::span<const std::complex<double>> in);  // normalized
  std::vector<std::complex<double>> forward_padded(std::span<const double> in);
  std::vector<double> inverse_padded(std::span<const std::complex<double>> in);  // normalized

  /// Weight of each half-spectrum entry in a full-spectrum sum (1 or 2).
  const std::vector<double>& half_weights() const { return half_weights_; }

 private:
  struct FreeTables {
    std::vector<std::complex<double>> hat;
    std::vector<double> real;
  };
  FreeTables& free_tables(double alpha);

  Grid grid_;
  std::unique_ptr<detail::FftPair> fft_;
  std::unique_ptr<detail::FftPair> fft_padded_;
  std::vector<double> lap_symbol_;
  std::vector<double> half_weights_;
  std::map<double, std::vector<double>> periodic_riesz_;
  std::map<double, FreeTables> free_;
  double fault_ = 0.0;
};

/// Discrete I_alpha * f.
Field riesz_convolve(const Field& f, const RieszOptions& opts, SpectralWorkspace& ws);

/// Spectral -Laplace f (symbol (2 pi |xi|)^2).
Field laplacian_apply(const Field& f, SpectralWorkspace& ws);

/// (-Laplace + b)^(-1) f, b > 0.
Field inverse_helmholtz(const Field& f, double b, SpectralWorkspace& ws);

/// (cell weight * sum |f|^r)^(1/r), pairwise summation.
double lp_norm(const Field& f, double r);
/// cell weight * sum f g.
double inner(const Field& f, const Field& g);
/// |f|_2^2.
double mass(const Field& f);
/// Fraction of |f|_2^2 carried by points with max_d |x_d| >= 0.45 L, i.e. the
/// outer shell whose thickness is 10% of the box length. Zero field gives 0.
double boundary_mass(const Field& f);
/// Boundary-mass level above which results are flagged as truncation-limited.
inline constexpr double kBoundaryMassWarn = 1e-8;

/// |f|_2^2 computed on the spectral side (Parseval).
double spectral_mass(const Field& f, SpectralWorkspace& ws);

/// out(x) = f(scale * (x - shift)) for every x of `target`, by trigonometric
/// interpolation of f along each axis. Points mapping outside f's box are 0.
Field resample_affine(const Field& f, const Grid& target, double scale,
                      std::span<const double> shift);

}  // namespace chq
