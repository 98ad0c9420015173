#pragma once

#include <limits>
#include <string>
#include <vector>

#include "chq/grid.hpp"

namespace chq {

enum class Regime { LowerEndpoint, Subcritical, MassCritical, Supercritical };

std::string to_string(Regime r);

/// (N, alpha, p) with the derived exponents fixed at construction.
///
///   p_low  = (N + alpha) / N          lower HLS endpoint
///   p_c    = (N + alpha + 2) / N      mass-critical exponent
///   p_high = (N + alpha) / (N - 2)    for N >= 3, +inf otherwise
///
/// Construction enforces p_low <= p < p_high. p is compared to p_low and p_c
/// with a relative tolerance of 1e-12 so values typed in decimal classify
/// the same way as the exact fractions.
class ChoquardParams {
 public:
  ChoquardParams(int dim, double alpha, double p);

  /// Convenience constructors for the two special exponents.
  static ChoquardParams mass_critical(int dim, double alpha);
  static ChoquardParams lower_endpoint(int dim, double alpha);

  int dim() const { return dim_; }
  double alpha() const { return alpha_; }
  double p() const { return p_; }
  double p_low() const { return p_low_; }
  double p_c() const { return p_c_; }
  double p_high() const { return p_high_; }
  double riesz_const() const { return riesz_c_; }
  Regime regime() const { return regime_; }

  /// Dilation exponent of B: B(u^t) = t^{Np - (N + alpha)} B(u).
  double b_dilation_exponent() const { return dim_ * p_ - (dim_ + alpha_); }
  /// Coefficients a, b of -a Lap Q + b Q = (I * |Q|^p)|Q|^{p-2} Q.
  double kinetic_coeff() const { return 0.5 * b_dilation_exponent(); }
  double mass_coeff() const { return 0.5 * (dim_ + alpha_ - (dim_ - 2) * p_); }

  /// Text of the admissible window, used in diagnostics.
  static std::string window_text();

 private:
  int dim_;
  double alpha_;
  double p_;
  double p_low_;
  double p_c_;
  double p_high_;
  double riesz_c_;
  Regime regime_;
};

struct Well {
  std::vector<double> center;
  double mu = 1.0;
  double q = 2.0;
};

/// V(x) = min_i mu_i |x - x_i|^{q_i}.
class PotentialSpec {
 public:
  PotentialSpec() = default;
  PotentialSpec(int dim, std::vector<Well> wells);

  const std::vector<Well>& wells() const { return wells_; }
  int dim() const { return dim_; }
  /// max_i q_i.
  double q_max() const;
  double operator()(std::span<const double> x) const;

 private:
  int dim_ = 0;
  std::vector<Well> wells_;
};

}  // namespace chq
