#include "chq/params.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chq/spectral.hpp"

namespace chq {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::LowerEndpoint: return "LowerEndpoint";
    case Regime::Subcritical: return "Subcritical";
    case Regime::MassCritical: return "MassCritical";
    case Regime::Supercritical: return "Supercritical";
  }
  return "?";
}

namespace {
bool near(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }
}  // namespace

std::string ChoquardParams::window_text() { return "(N+alpha)/N <= p < (N+alpha)/(N-2)_+"; }

ChoquardParams::ChoquardParams(int dim, double alpha, double p) : dim_(dim), alpha_(alpha), p_(p) {
  if (dim < 1 || dim > 3) throw DomainError("params: N must be 1, 2 or 3");
  if (!(alpha > 0.0 && alpha < dim)) throw DomainError("params: alpha must lie in (0, N)");
  p_low_ = (dim + alpha) / dim;
  p_c_ = (dim + alpha + 2.0) / dim;
  p_high_ = dim >= 3 ? (dim + alpha) / (dim - 2.0) : std::numeric_limits<double>::infinity();
  if (near(p, p_low_)) p_ = p_low_;
  if (near(p, p_c_)) p_ = p_c_;
  if (!std::isfinite(p_) || p_ < p_low_ || p_ >= p_high_) {
    std::ostringstream os;
    os.precision(17);
    os << "params: p = " << p << " violates " << window_text() << " (here " << p_low_
       << " <= p < " << p_high_ << ")";
    throw DomainError(os.str());
  }
  riesz_c_ = riesz_constant(dim, alpha);
  if (p_ == p_low_)
    regime_ = Regime::LowerEndpoint;
  else if (p_ < p_c_)
    regime_ = Regime::Subcritical;
  else if (p_ == p_c_)
    regime_ = Regime::MassCritical;
  else
    regime_ = Regime::Supercritical;
}

ChoquardParams ChoquardParams::mass_critical(int dim, double alpha) {
  return ChoquardParams(dim, alpha, (dim + alpha + 2.0) / dim);
}

ChoquardParams ChoquardParams::lower_endpoint(int dim, double alpha) {
  return ChoquardParams(dim, alpha, (dim + alpha) / dim);
}

PotentialSpec::PotentialSpec(int dim, std::vector<Well> wells) : dim_(dim), wells_(std::move(wells)) {
  if (wells_.empty()) throw DomainError("potential: at least one well is required");
  for (std::size_t i = 0; i < wells_.size(); ++i) {
    const Well& w = wells_[i];
    if (static_cast<int>(w.center.size()) != dim)
      throw DomainError("potential: well " + std::to_string(i + 1) + " center has wrong dimension");
    if (!(w.mu > 0.0)) throw DomainError("potential: well " + std::to_string(i + 1) + " needs mu > 0");
    if (!(w.q > 0.0)) throw DomainError("potential: well " + std::to_string(i + 1) + " needs q > 0");
    for (std::size_t j = 0; j < i; ++j)
      if (wells_[j].center == w.center)
        throw DomainError("potential: wells " + std::to_string(j + 1) + " and " +
                          std::to_string(i + 1) + " share a center");
  }
}

double PotentialSpec::q_max() const {
  double q = 0.0;
  for (const auto& w : wells_) q = std::max(q, w.q);
  return q;
}

double PotentialSpec::operator()(std::span<const double> x) const {
  double v = std::numeric_limits<double>::infinity();
  for (const auto& w : wells_) {
    double r2 = 0.0;
    for (int d = 0; d < dim_; ++d) {
      double dx = x[d] - w.center[d];
      r2 += dx * dx;
    }
    v = std::min(v, w.mu * std::pow(r2, 0.5 * w.q));
  }
  return v;
}

}  // namespace chq
