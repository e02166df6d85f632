#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace fiberlin {

using Vector = std::vector<double>;

/// Malformed configuration or violated precondition on user input.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Trivialized bundle R^base_dim x R^fiber_dim -> R^base_dim.
/// base_dim == 0 is a bundle over a point.
struct TrivialBundle {
  std::size_t base_dim = 0;
  std::size_t fiber_dim = 1;

  TrivialBundle() = default;
  TrivialBundle(std::size_t base, std::size_t fiber);

  std::size_t total_dim() const noexcept { return base_dim + fiber_dim; }
  friend bool operator==(const TrivialBundle&, const TrivialBundle&) = default;
};

struct BundlePoint {
  Vector x;
  Vector v;

  /// Concatenated coordinates (x, v).
  Vector coords() const;
  static BundlePoint split(std::span<const double> coords, std::size_t base_dim);
  friend bool operator==(const BundlePoint&, const BundlePoint&) = default;
};

/// Fiberwise scalar action t.(x, v) = (x, t v).
BundlePoint scale(double t, const BundlePoint& p);

/// Euclidean norm of the fiber component.
double norm(const BundlePoint& p);

/// Membership in the closed tube {norm <= eps}. Throws ConfigError for eps <= 0.
bool in_tube(const BundlePoint& p, double eps);

enum class FiberShape { Ball, Box };

/// Neighbourhood of the zero section: x in an axis-aligned box, fiber in a
/// ball (or cube) of the given radius. Star-like in the fiber by construction.
struct Domain {
  Vector base_lo;
  Vector base_hi;
  double fiber_radius = 1.0;
  FiberShape fiber_shape = FiberShape::Ball;

  bool contains(const BundlePoint& p, double slack = 1e-12) const;
  /// Largest eps with the tube R_eps (over the base box) inside the domain.
  double tube_radius() const noexcept { return fiber_radius; }
};

}  // namespace fiberlin
