#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fiberlin/bundle.hpp"
#include "fiberlin/bundle_map.hpp"
#include "fiberlin/parallel.hpp"

namespace fiberlin {

using VectorField = std::function<Vector(std::span<const double>)>;
using ScalarFn = std::function<double(double)>;

/// Default central-difference step for a partial of the given order at a
/// coordinate value: 1e-5, 1e-4, 1e-3 for orders 1..3, scaled by max(1, |c|).
double default_step(int order, double coordinate);

/// Pure partial of order 1..3 along one axis by central differences.
/// Throws std::invalid_argument for step <= 0 or an unsupported order.
Vector partial_fd(const VectorField& f, std::span<const double> point, std::size_t axis, int order,
                  std::optional<double> step = std::nullopt);

/// Exponent per coordinate axis.
using MultiIndex = std::vector<int>;

/// All multi-indices of total order `order` supported on `axes`, in
/// lexicographic order of the exponent vectors (largest first).
std::vector<MultiIndex> multi_indices(std::size_t dim, std::span<const std::size_t> axes, int order);

/// Mixed partial d^alpha f by a tensor product of central stencils; every
/// axis uses the default step for the total order |alpha|.
Vector partial_fd(const VectorField& f, std::span<const double> point, const MultiIndex& alpha);

struct GridAxis {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t count = 2;
};

/// Tensor grid over a box, iterated row-major (last axis fastest).
class SampleGrid {
public:
  SampleGrid() = default;
  /// Throws ConfigError if some axis has fewer than 2 points or lo > hi.
  explicit SampleGrid(std::vector<GridAxis> axes);

  std::size_t dim() const noexcept { return axes_.size(); }
  std::size_t size() const noexcept;
  Vector point(std::size_t index) const;
  double spacing(std::size_t axis) const;
  /// Smallest positive spacing over all axes.
  double min_spacing() const;
  const std::vector<GridAxis>& axes() const noexcept { return axes_; }

  /// Points kept by `keep` (all points when empty), in grid order.
  std::vector<Vector> points(const std::function<bool(std::span<const double>)>& keep = {}) const;

private:
  std::vector<GridAxis> axes_;
};

/// Grid over the base box times the fiber box [-r, r]^m, restricted to the
/// domain (the ball when the domain fiber is a ball).
std::vector<Vector> domain_samples(const Domain& domain, std::size_t fiber_dim, std::size_t base_points,
                                   std::size_t fiber_points, double fiber_extent);

/// Partial Jacobian blocks of a bundle map: P base/base, Q base/fiber,
/// R fiber/base, S fiber/fiber (rows index the target).
struct JacobianBlocks {
  Eigen::MatrixXd P;
  Eigen::MatrixXd Q;
  Eigen::MatrixXd R;
  Eigen::MatrixXd S;

  static JacobianBlocks split(const Eigen::MatrixXd& full, std::size_t source_base, std::size_t target_base);
};

/// Full Jacobian by first-order central differences (default steps unless given).
Eigen::MatrixXd jacobian_fd(const VectorField& f, std::span<const double> point,
                            std::optional<double> step = std::nullopt);

JacobianBlocks jacobian_blocks(const BundleMap& h, const BundlePoint& p, std::optional<double> step = std::nullopt);

/// Sum of absolute entries.
double entry_sum(const Eigen::MatrixXd& m);

/// |f|_{r,K}: sum over multi-indices |alpha| = r on `axes` and components i of
/// the grid max of |d^alpha f_i|. Orders above 3 throw ConfigError.
double seminorm(const VectorField& f, int order, std::span<const Vector> points, std::span<const std::size_t> axes,
                Exec exec = default_exec());

/// Convenience: differentiate in fiber axes only (those after `base_dim`) or in all axes.
double seminorm(const VectorField& f, int order, std::span<const Vector> points, std::size_t dim,
                std::size_t base_dim, bool fiber_axes_only, Exec exec = default_exec());

double seminorm(const VectorField& f, int order, const SampleGrid& K, std::size_t base_dim, bool fiber_axes_only,
                Exec exec = default_exec());

/// ||f||_{r,K} = sum of the seminorms of orders 0..r.
double norm_r(const VectorField& f, int order, const SampleGrid& K, std::size_t base_dim, bool fiber_axes_only,
              Exec exec = default_exec());

/// Gauss-Legendre rule on [-1, 1].
class GaussLegendre {
public:
  explicit GaussLegendre(std::size_t nodes);

  /// Shared rule for up to 128 nodes, built once.
  static const GaussLegendre& cached(std::size_t nodes);

  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  template <class Fn>
  double integrate(Fn&& fn, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * fn(mid + half * nodes_[i]);
    return half * sum;
  }

private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

double gauss_legendre(const ScalarFn& integrand, double a, double b, std::size_t nodes);

}  // namespace fiberlin
