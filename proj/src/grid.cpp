#include "chq/grid.hpp"

#include <cmath>
#include <sstream>

namespace chq {

Grid::Grid(int dim, int points_per_axis, double box_length)
    : dim_(dim), m_(points_per_axis), l_(box_length) {
  if (dim < 1 || dim > 3) throw DomainError("grid: dimension must be 1, 2 or 3");
  if (m_ < 8 || (m_ & (m_ - 1)) != 0)
    throw DomainError("grid: points per axis must be a power of two >= 8, got " +
                      std::to_string(m_));
  if (!(l_ > 0.0) || !std::isfinite(l_)) throw DomainError("grid: box length must be positive");
  // M is a power of two, so L/M is exact and h*M == L.
  h_ = l_ / m_;
  w_ = std::pow(h_, dim_);
  size_ = 1;
  for (int d = 0; d < dim_; ++d) size_ *= static_cast<std::size_t>(m_);
}

std::array<int, 3> Grid::unflatten(std::size_t flat) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int d = dim_ - 1; d >= 0; --d) {
    idx[d] = static_cast<int>(flat % m_);
    flat /= m_;
  }
  return idx;
}

std::size_t Grid::flatten(const std::array<int, 3>& idx) const {
  std::size_t flat = 0;
  for (int d = 0; d < dim_; ++d) flat = flat * m_ + static_cast<std::size_t>(idx[d]);
  return flat;
}

double Grid::dist2(std::size_t flat, std::span<const double> center) const {
  auto idx = unflatten(flat);
  double r2 = 0.0;
  for (int d = 0; d < dim_; ++d) {
    double dx = coord(idx[d]) - center[d];
    r2 += dx * dx;
  }
  return r2;
}

std::string Grid::describe() const {
  std::ostringstream os;
  os << "N=" << dim_ << " M=" << m_ << " L=" << l_;
  return os.str();
}

Field::Field(const Grid& g, std::vector<double> values) : grid_(g), v_(std::move(values)) {
  if (v_.size() != g.size()) throw DomainError("field: sample count does not match grid");
}

Field& Field::operator+=(const Field& o) { return axpy(1.0, o); }
Field& Field::operator-=(const Field& o) { return axpy(-1.0, o); }

Field& Field::operator*=(double s) {
  for (auto& x : v_) x *= s;
  return *this;
}

Field& Field::axpy(double s, const Field& o) {
  if (o.grid_ != grid_) throw DomainError("field: grid mismatch");
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += s * o.v_[i];
  return *this;
}

bool Field::all_finite() const {
  for (double x : v_)
    if (!std::isfinite(x)) return false;
  return true;
}

double Field::peak() const { return std::abs(v_[argmax_abs()]); }

std::size_t Field::argmax_abs() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v_.size(); ++i)
    if (std::abs(v_[i]) > std::abs(v_[best])) best = i;
  return best;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 8) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  std::size_t half = x.size() / 2;
  return pairwise_sum(x.first(half)) + pairwise_sum(x.subspan(half));
}

}  // namespace chq
