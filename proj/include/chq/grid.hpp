#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chq {

/// Base class for all library errors. Callers that only care about failure
/// vs. success catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input parameters (bad window, bad grid, mismatched workspace).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Uniform grid on the box [-L/2, L/2)^N with M points per axis.
///
/// Sample j along an axis sits at x_j = -L/2 + j*h, so x = 0 is the sample
/// j = M/2. Storage is row-major with the last axis fastest.
class Grid {
 public:
  Grid(int dim, int points_per_axis, double box_length);

  int dim() const { return dim_; }
  int points_per_axis() const { return m_; }
  double box_length() const { return l_; }
  double spacing() const { return h_; }
  double cell_weight() const { return w_; }
  std::size_t size() const { return size_; }

  /// Coordinate of sample j along one axis.
  double coord(int j) const { return -0.5 * l_ + j * h_; }

  /// Multi-index of flat index `flat` (unused trailing entries are zero).
  std::array<int, 3> unflatten(std::size_t flat) const;
  std::size_t flatten(const std::array<int, 3>& idx) const;

  /// Squared distance of sample `flat` from `center`.
  double dist2(std::size_t flat, std::span<const double> center) const;

  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && m_ == o.m_ && l_ == o.l_;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }

  std::string describe() const;

 private:
  int dim_;
  int m_;
  double l_;
  double h_;
  double w_;
  std::size_t size_;
};

/// Real samples on a Grid. Value type; copying copies the samples.
class Field {
 public:
  explicit Field(const Grid& g) : grid_(g), v_(g.size(), 0.0) {}
  Field(const Grid& g, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return v_.size(); }

  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  std::span<double> values() { return v_; }
  std::span<const double> values() const { return v_; }
  std::vector<double>& raw() { return v_; }
  const std::vector<double>& raw() const { return v_; }

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double s);
  /// this += s * o
  Field& axpy(double s, const Field& o);

  bool all_finite() const;
  /// Largest |value|.
  double peak() const;
  std::size_t argmax_abs() const;

 private:
  Grid grid_;
  std::vector<double> v_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

/// Compensation-free pairwise (cascade) sum. Block size 8 at the leaves.
double pairwise_sum(std::span<const double> x);

/// Sample f at every grid point; f receives the point's coordinates.
template <class F>
Field sample(const Grid& g, F&& f) {
  Field out(g);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto idx = g.unflatten(i);
    for (int d = 0; d < g.dim(); ++d) x[d] = g.coord(idx[d]);
    out[i] = f(std::span<const double>(x.data(), static_cast<std::size_t>(g.dim())));
  }
  return out;
}

}  // namespace chq
