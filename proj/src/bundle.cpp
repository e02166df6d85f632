#include "fiberlin/bundle.hpp"

#include <algorithm>
#include <cmath>

namespace fiberlin {

TrivialBundle::TrivialBundle(std::size_t base, std::size_t fiber) : base_dim(base), fiber_dim(fiber) {
  if (fiber == 0) throw ConfigError("fiber dimension must be positive");
}

Vector BundlePoint::coords() const {
  Vector out(x);
  out.insert(out.end(), v.begin(), v.end());
  return out;
}

BundlePoint BundlePoint::split(std::span<const double> coords, std::size_t base_dim) {
  BundlePoint p;
  p.x.assign(coords.begin(), coords.begin() + static_cast<std::ptrdiff_t>(base_dim));
  p.v.assign(coords.begin() + static_cast<std::ptrdiff_t>(base_dim), coords.end());
  return p;
}

BundlePoint scale(double t, const BundlePoint& p) {
  BundlePoint out{p.x, p.v};
  for (double& c : out.v) c *= t;
  return out;
}

double norm(const BundlePoint& p) {
  double s = 0.0;
  for (double c : p.v) s += c * c;
  return std::sqrt(s);
}

bool in_tube(const BundlePoint& p, double eps) {
  if (!(eps > 0.0)) throw ConfigError("tube radius must be positive");
  return norm(p) <= eps;
}

bool Domain::contains(const BundlePoint& p, double slack) const {
  if (p.x.size() != base_lo.size()) return false;
  for (std::size_t i = 0; i < p.x.size(); ++i)
    if (p.x[i] < base_lo[i] - slack || p.x[i] > base_hi[i] + slack) return false;
  if (fiber_shape == FiberShape::Ball) return norm(p) <= fiber_radius + slack;
  return std::all_of(p.v.begin(), p.v.end(), [&](double c) { return std::fabs(c) <= fiber_radius + slack; });
}

}  // namespace fiberlin
