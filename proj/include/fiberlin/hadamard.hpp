#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fiberlin/bundle.hpp"
#include "fiberlin/bundle_map.hpp"

namespace fiberlin {

inline constexpr std::size_t kDefaultQuadNodes = 32;

/// Below this tau the homotopy is evaluated through the integral formula;
/// above it through the difference quotient b(x, tau v) / tau.
inline constexpr double kDirectTauThreshold = 1e-6;

/// The vector bundle morphism (x, v) -> (a(x, 0), S(x, 0) v), with S(x, 0)
/// the fiber Jacobian of b on the zero section (central differences).
BundleMap fiber_tangent(const BundleMap& h);

struct LimitResult {
  Vector value;       ///< fiber component of the extrapolated limit
  bool converged;     ///< successive extrapolants agree to 1e-6
  double spread;      ///< max difference between the last two extrapolants
};

/// lim_{t->0} b(x, t v) / t by Neville extrapolation to t = 0 over
/// successive triples of the sequence (two levels). Independent of the
/// finite-difference path used by fiber_tangent.
LimitResult fiber_tangent_limit(const BundleMap& h, const BundlePoint& p,
                                std::span<const double> t_sequence = {});

/// g(tau, x, v) = (a(x, tau v), sum_i v_i int_0^1 db/dv_i(x, s tau v) ds).
/// Uses b(x, tau v) / tau for tau > kDirectTauThreshold.
BundlePoint hadamard_homotopy(const BundleMap& h, double tau, const BundlePoint& p,
                              std::size_t quad_nodes = kDefaultQuadNodes);

/// Same homotopy, always through the Gauss-Legendre integral.
BundlePoint hadamard_quadrature(const BundleMap& h, double tau, const BundlePoint& p,
                                std::size_t quad_nodes = kDefaultQuadNodes);

enum class HadamardRoute { Dispatch, Quadrature };

/// |b(x, tau v) - tau g(tau, x, v)| (Euclidean); zero at tau = 0.
double check_hadamard_identity(const BundleMap& h, double tau, const BundlePoint& p,
                               std::size_t quad_nodes = kDefaultQuadNodes,
                               HadamardRoute route = HadamardRoute::Dispatch);

/// The map w -> g(tau, w) as a bundle map (for Jacobian checks).
BundleMap hadamard_slice(const BundleMap& h, double tau, std::size_t quad_nodes = kDefaultQuadNodes);

}  // namespace fiberlin
