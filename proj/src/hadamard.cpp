#include "fiberlin/hadamard.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "fiberlin/calculus.hpp"

namespace fiberlin {

namespace {

// Fiber rows of db/dv_j at the given coordinates.
Vector fiber_partial(const BundleMap& h, std::span<const double> coords, std::size_t j) {
  const std::size_t axis = h.source().base_dim + j;
  Vector col = partial_fd(h.function(), coords, axis, 1);
  col.erase(col.begin(), col.begin() + static_cast<std::ptrdiff_t>(h.target().base_dim));
  return col;
}

Vector base_at(const BundleMap& h, std::span<const double> coords) {
  Vector img = h(coords);
  img.resize(h.target().base_dim);
  return img;
}

}  // namespace

BundleMap fiber_tangent(const BundleMap& h) {
  const std::size_t mb = h.source().base_dim;
  const std::size_t mf = h.source().fiber_dim;
  BundleMap::Fn fn = [h, mb, mf](std::span<const double> coords) {
    Vector zero(coords.begin(), coords.end());
    std::fill(zero.begin() + static_cast<std::ptrdiff_t>(mb), zero.end(), 0.0);
    Vector out = base_at(h, zero);
    Vector fiber(h.target().fiber_dim, 0.0);
    for (std::size_t j = 0; j < mf; ++j) {
      const Vector col = fiber_partial(h, zero, j);
      for (std::size_t i = 0; i < fiber.size(); ++i) fiber[i] += col[i] * coords[mb + j];
    }
    out.insert(out.end(), fiber.begin(), fiber.end());
    return out;
  };
  return BundleMap(h.source(), h.target(), std::move(fn), h.domain(), false);
}

LimitResult fiber_tangent_limit(const BundleMap& h, const BundlePoint& p, std::span<const double> t_sequence) {
  static constexpr std::array<double, 4> kDefault{0.02, 0.01, 0.005, 0.0025};
  std::vector<double> ts(t_sequence.begin(), t_sequence.end());
  if (ts.empty()) ts.assign(kDefault.begin(), kDefault.end());
  if (ts.size() < 3) throw std::invalid_argument("fiber_tangent_limit needs at least three t values");

  const std::size_t nf = h.target().fiber_dim;
  const std::size_t nb = h.target().base_dim;
  std::vector<Vector> ys;
  for (double t : ts) {
    if (!(t > 0.0)) throw std::invalid_argument("t sequence must be positive");
    Vector img = h(scale(t, p).coords());
    Vector y(nf);
    for (std::size_t i = 0; i < nf; ++i) y[i] = img[nb + i] / t;
    ys.push_back(std::move(y));
  }
  // Quadratic (Neville) extrapolation to 0 through each consecutive triple.
  auto extrapolate = [&](std::size_t k) {
    const double t0 = ts[k], t1 = ts[k + 1], t2 = ts[k + 2];
    const double l0 = t1 * t2 / ((t0 - t1) * (t0 - t2));
    const double l1 = t0 * t2 / ((t1 - t0) * (t1 - t2));
    const double l2 = t0 * t1 / ((t2 - t0) * (t2 - t1));
    Vector out(nf);
    for (std::size_t i = 0; i < nf; ++i) out[i] = l0 * ys[k][i] + l1 * ys[k + 1][i] + l2 * ys[k + 2][i];
    return out;
  };
  LimitResult res;
  res.value = extrapolate(ts.size() - 3);
  res.spread = 0.0;
  if (ts.size() >= 4) {
    const Vector prev = extrapolate(ts.size() - 4);
    for (std::size_t i = 0; i < nf; ++i) res.spread = std::max(res.spread, std::fabs(prev[i] - res.value[i]));
  }
  res.converged = res.spread <= 1e-6;
  return res;
}

BundlePoint hadamard_quadrature(const BundleMap& h, double tau, const BundlePoint& p, std::size_t quad_nodes) {
  const std::size_t mb = h.source().base_dim;
  const std::size_t mf = h.source().fiber_dim;
  const std::size_t nf = h.target().fiber_dim;
  BundlePoint out;
  out.x = base_at(h, scale(tau, p).coords());
  out.v.assign(nf, 0.0);

  const GaussLegendre& rule = GaussLegendre::cached(quad_nodes);
  Vector coords = p.coords();
  for (std::size_t k = 0; k < rule.nodes().size(); ++k) {
    const double s = 0.5 * (rule.nodes()[k] + 1.0);
    const double w = 0.5 * rule.weights()[k];
    for (std::size_t j = 0; j < mf; ++j) coords[mb + j] = s * tau * p.v[j];
    for (std::size_t j = 0; j < mf; ++j) {
      const Vector col = fiber_partial(h, coords, j);
      for (std::size_t i = 0; i < nf; ++i) out.v[i] += w * p.v[j] * col[i];
    }
  }
  return out;
}

BundlePoint hadamard_homotopy(const BundleMap& h, double tau, const BundlePoint& p, std::size_t quad_nodes) {
  if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("tau must lie in [0, 1]");
  if (tau <= kDirectTauThreshold) return hadamard_quadrature(h, tau, p, quad_nodes);
  BundlePoint img = h(scale(tau, p));
  if (tau != 1.0)
    for (double& c : img.v) c /= tau;
  return img;
}

double check_hadamard_identity(const BundleMap& h, double tau, const BundlePoint& p, std::size_t quad_nodes,
                               HadamardRoute route) {
  if (tau == 0.0) return 0.0;
  const BundlePoint lhs = h(scale(tau, p));
  const BundlePoint g = route == HadamardRoute::Quadrature ? hadamard_quadrature(h, tau, p, quad_nodes)
                                                           : hadamard_homotopy(h, tau, p, quad_nodes);
  double s = 0.0;
  for (std::size_t i = 0; i < lhs.x.size(); ++i) s += (lhs.x[i] - g.x[i]) * (lhs.x[i] - g.x[i]);
  for (std::size_t i = 0; i < lhs.v.size(); ++i) {
    const double d = lhs.v[i] - tau * g.v[i];
    s += d * d;
  }
  return std::sqrt(s);
}

BundleMap hadamard_slice(const BundleMap& h, double tau, std::size_t quad_nodes) {
  const std::size_t mb = h.source().base_dim;
  BundleMap::Fn fn = [h, tau, quad_nodes, mb](std::span<const double> coords) {
    const BundlePoint g = hadamard_homotopy(h, tau, BundlePoint::split(coords, mb), quad_nodes);
    return g.coords();
  };
  return BundleMap(h.source(), h.target(), std::move(fn), h.domain(), false);
}

}  // namespace fiberlin
