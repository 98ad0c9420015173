#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include "chq/functionals.hpp"
#include "chq/spectral.hpp"
#include "doctest.h"

namespace chq::test {

/// Runs `prop` on `count` generated cases; the first failing case index and
/// seed are reported through doctest.
template <class Gen, class Prop>
void for_all(int count, std::uint64_t seed, Gen&& gen, Prop&& prop) {
  std::mt19937_64 rng(seed);
  for (int k = 0; k < count; ++k) {
    auto value = gen(rng);
    CAPTURE(k);
    CAPTURE(seed);
    prop(value);
  }
}

inline double uniform(std::mt19937_64& rng, double a, double b) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

struct MixtureShape {
  double width_lo = 0.05;  // fractions of the box length
  double width_hi = 0.09;
  double center = 0.125;
};

/// Sum of `terms` Gaussians with random amplitude, width and center; with the
/// default shape the field decays to roundoff at the boundary.
inline Field gaussian_mixture(const Grid& g, std::mt19937_64& rng, int terms = 3,
                              bool positive = false, MixtureShape shape = {}) {
  Field f(g);
  const double L = g.box_length();
  for (int t = 0; t < terms; ++t) {
    const double amp = positive ? uniform(rng, 0.3, 1.0) : uniform(rng, -1.0, 1.0);
    const double w = uniform(rng, shape.width_lo, shape.width_hi) * L;
    std::vector<double> c(g.dim());
    for (double& x : c) x = uniform(rng, -shape.center * L, shape.center * L);
    f += amp * sample(g, [&](std::span<const double> x) {
      double r2 = 0.0;
      for (int d = 0; d < g.dim(); ++d) r2 += (x[d] - c[d]) * (x[d] - c[d]);
      return std::exp(-r2 / (2 * w * w));
    });
  }
  return f;
}

inline double max_abs_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace chq::test
