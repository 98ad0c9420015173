#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "chq/solvers.hpp"

namespace chq {

struct OracleReport {
  std::string oracle;
  double max_rel_err = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::string input;
};

/// Brute-force h^N sum_j K(x_i - x_j) f_j with the workspace's real-space
/// kernel, evaluated pair by pair. Refuses grids with more than 16 points per axis.
Field direct_convolution_oracle(const Field& f, double alpha, SpectralWorkspace& ws);
constexpr int kDirectOracleMaxPoints = 16;

/// (c_{3,2}/|x|) * exp(-|x|^2/(2 sigma^2)) at the given radii, by adaptive
/// Gauss-Kronrod quadrature of the radial shell formula.
std::vector<double> newtonian_gaussian_oracle(std::span<const double> radii, double sigma);

/// R = sup B(u) / |u|_2^{2(N+alpha)/N} at p = (N+alpha)/N: the Riesz constant
/// times Lieb's sharp Hardy-Littlewood-Sobolev constant.
double hls_sharp_constant(int dim, double alpha);

/// Sum of a few Gaussians with random centers, widths and signed amplitudes,
/// kept well inside the box so boundary mass stays negligible.
Field random_smooth_field(const Grid& g, std::mt19937_64& rng);

struct SuiteOptions {
  /// Corrupt the convolution table to check that the suite notices.
  bool inject_kernel_fault = false;
};

/// Runs the checks in a fixed order. Individual failures never abort the run.
std::vector<OracleReport> run_suite(const SuiteOptions& opts = {});
bool all_pass(const std::vector<OracleReport>& reports);
std::string to_jsonl(const OracleReport& r);

}  // namespace chq
