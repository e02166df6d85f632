#include "fiberlin/calculus.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fiberlin {

namespace {

struct Stencil {
  std::vector<int> offsets;
  std::vector<double> weights;
};

// Second-order accurate central stencils, weights for unit step.
const Stencil& stencil(int order) {
  static const std::array<Stencil, 4> table{{
      {{0}, {1.0}},
      {{-1, 1}, {-0.5, 0.5}},
      {{-1, 0, 1}, {1.0, -2.0, 1.0}},
      {{-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}},
  }};
  return table.at(static_cast<std::size_t>(order));
}

void check_order(int order) {
  if (order < 1 || order > 3) throw std::invalid_argument("finite differences support orders 1..3");
}

void accumulate(Vector& acc, const Vector& value, double w) {
  if (acc.empty()) acc.assign(value.size(), 0.0);
  for (std::size_t i = 0; i < value.size(); ++i) acc[i] += w * value[i];
}

}  // namespace

double default_step(int order, double coordinate) {
  check_order(order);
  static constexpr std::array<double, 4> base{0.0, 1e-5, 1e-4, 1e-3};
  return base[static_cast<std::size_t>(order)] * std::max(1.0, std::fabs(coordinate));
}

Vector partial_fd(const VectorField& f, std::span<const double> point, std::size_t axis, int order,
                  std::optional<double> step) {
  check_order(order);
  if (axis >= point.size()) throw std::invalid_argument("axis out of range");
  const double h = step ? *step : default_step(order, point[axis]);
  if (!(h > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  const Stencil& st = stencil(order);
  Vector work(point.begin(), point.end());
  Vector acc;
  for (std::size_t k = 0; k < st.offsets.size(); ++k) {
    work[axis] = point[axis] + st.offsets[k] * h;
    accumulate(acc, f(work), st.weights[k]);
  }
  const double scale = std::pow(h, order);
  for (double& c : acc) c /= scale;
  return acc;
}

std::vector<MultiIndex> multi_indices(std::size_t dim, std::span<const std::size_t> axes, int order) {
  std::vector<MultiIndex> out;
  MultiIndex current(dim, 0);
  auto rec = [&](auto&& self, std::size_t pos, int remaining) -> void {
    if (pos + 1 == axes.size()) {
      current[axes[pos]] = remaining;
      out.push_back(current);
      current[axes[pos]] = 0;
      return;
    }
    for (int e = remaining; e >= 0; --e) {
      current[axes[pos]] = e;
      self(self, pos + 1, remaining - e);
    }
    current[axes[pos]] = 0;
  };
  if (order == 0) return {MultiIndex(dim, 0)};
  if (axes.empty()) return out;
  rec(rec, 0, order);
  return out;
}

Vector partial_fd(const VectorField& f, std::span<const double> point, const MultiIndex& alpha) {
  int total = 0;
  for (int a : alpha) total += a;
  if (total == 0) return f(point);
  check_order(total);

  std::vector<std::size_t> active;
  std::vector<double> steps;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (alpha[i] > 0) {
      active.push_back(i);
      steps.push_back(default_step(total, point[i]));
    }
  }
  // Tensor product of the per-axis stencils.
  std::vector<std::size_t> cursor(active.size(), 0);
  Vector work(point.begin(), point.end());
  Vector acc;
  for (;;) {
    double w = 1.0;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const Stencil& st = stencil(alpha[active[k]]);
      work[active[k]] = point[active[k]] + st.offsets[cursor[k]] * steps[k];
      w *= st.weights[cursor[k]];
    }
    accumulate(acc, f(work), w);
    std::size_t k = 0;
    for (; k < active.size(); ++k) {
      if (++cursor[k] < stencil(alpha[active[k]]).offsets.size()) break;
      cursor[k] = 0;
    }
    if (k == active.size()) break;
  }
  double scale = 1.0;
  for (std::size_t k = 0; k < active.size(); ++k) scale *= std::pow(steps[k], alpha[active[k]]);
  for (double& c : acc) c /= scale;
  return acc;
}

SampleGrid::SampleGrid(std::vector<GridAxis> axes) : axes_(std::move(axes)) {
  for (const auto& ax : axes_) {
    if (ax.count < 2) throw ConfigError("sample grids need at least 2 points per axis");
    if (ax.lo > ax.hi) throw ConfigError("sample grid axis has lo > hi");
  }
}

std::size_t SampleGrid::size() const noexcept {
  if (axes_.empty()) return 0;
  std::size_t n = 1;
  for (const auto& ax : axes_) n *= ax.count;
  return n;
}

Vector SampleGrid::point(std::size_t index) const {
  Vector p(axes_.size());
  for (std::size_t i = axes_.size(); i-- > 0;) {
    const auto& ax = axes_[i];
    const std::size_t k = index % ax.count;
    index /= ax.count;
    p[i] = ax.lo + (ax.hi - ax.lo) * static_cast<double>(k) / static_cast<double>(ax.count - 1);
  }
  return p;
}

double SampleGrid::spacing(std::size_t axis) const {
  const auto& ax = axes_.at(axis);
  return (ax.hi - ax.lo) / static_cast<double>(ax.count - 1);
}

double SampleGrid::min_spacing() const {
  double best = 0.0;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    const double s = spacing(i);
    if (s > 0.0 && (best == 0.0 || s < best)) best = s;
  }
  return best;
}

std::vector<Vector> SampleGrid::points(const std::function<bool(std::span<const double>)>& keep) const {
  std::vector<Vector> out;
  const std::size_t n = size();
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector p = point(i);
    if (!keep || keep(p)) out.push_back(std::move(p));
  }
  return out;
}

std::vector<Vector> domain_samples(const Domain& domain, std::size_t fiber_dim, std::size_t base_points,
                                   std::size_t fiber_points, double fiber_extent) {
  const std::size_t base_dim = domain.base_lo.size();
  std::vector<Vector> values;
  auto linspace = [](double lo, double hi, std::size_t n) {
    if (lo == hi || n < 2) return Vector{lo};
    Vector out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
    return out;
  };
  for (std::size_t i = 0; i < base_dim; ++i) values.push_back(linspace(domain.base_lo[i], domain.base_hi[i], base_points));
  for (std::size_t j = 0; j < fiber_dim; ++j) values.push_back(linspace(-fiber_extent, fiber_extent, fiber_points));

  const double radius = std::min(fiber_extent, domain.fiber_radius) * (1.0 + 1e-12);
  const bool ball = domain.fiber_shape == FiberShape::Ball;
  std::vector<Vector> out;
  std::vector<std::size_t> cursor(values.size(), 0);
  Vector p(values.size());
  for (;;) {
    double r2 = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      p[i] = values[i][cursor[i]];
      if (i >= base_dim) r2 += p[i] * p[i];
    }
    if (!ball || std::sqrt(r2) <= radius) out.push_back(p);
    std::size_t i = values.size();
    while (i-- > 0) {
      if (++cursor[i] < values[i].size()) break;
      cursor[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

JacobianBlocks JacobianBlocks::split(const Eigen::MatrixXd& full, std::size_t source_base, std::size_t target_base) {
  const auto rows = static_cast<Eigen::Index>(full.rows());
  const auto cols = static_cast<Eigen::Index>(full.cols());
  const auto mb = static_cast<Eigen::Index>(source_base);
  const auto nb = static_cast<Eigen::Index>(target_base);
  JacobianBlocks out;
  out.P = full.block(0, 0, nb, mb);
  out.Q = full.block(0, mb, nb, cols - mb);
  out.R = full.block(nb, 0, rows - nb, mb);
  out.S = full.block(nb, mb, rows - nb, cols - mb);
  return out;
}

Eigen::MatrixXd jacobian_fd(const VectorField& f, std::span<const double> point, std::optional<double> step) {
  Eigen::MatrixXd jac;
  for (std::size_t j = 0; j < point.size(); ++j) {
    const Vector col = partial_fd(f, point, j, 1, step);
    if (jac.size() == 0) jac.resize(static_cast<Eigen::Index>(col.size()), static_cast<Eigen::Index>(point.size()));
    for (std::size_t i = 0; i < col.size(); ++i)
      jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  return jac;
}

JacobianBlocks jacobian_blocks(const BundleMap& h, const BundlePoint& p, std::optional<double> step) {
  const Vector c = p.coords();
  return JacobianBlocks::split(jacobian_fd(h.function(), c, step), h.source().base_dim, h.target().base_dim);
}

double entry_sum(const Eigen::MatrixXd& m) { return m.cwiseAbs().sum(); }

double seminorm(const VectorField& f, int order, std::span<const Vector> points, std::span<const std::size_t> axes,
                Exec exec) {
  if (order < 0 || order > 3) throw ConfigError("seminorms are supported for orders 0..3");
  if (points.empty()) return 0.0;
  const std::size_t dim = points.front().size();
  const auto alphas = multi_indices(dim, axes, order);
  if (alphas.empty()) return 0.0;

  // Per point: |d^alpha f_i| for every (alpha, i), flattened.
  const auto rows = parallel_map<Vector>(
      points.size(),
      [&](std::size_t k) {
        Vector out;
        for (const auto& alpha : alphas) {
          const Vector d = partial_fd(f, points[k], alpha);
          for (double c : d) out.push_back(std::fabs(c));
        }
        return out;
      },
      exec);
  Vector sup(rows.front().size(), 0.0);
  for (const auto& row : rows)
    for (std::size_t i = 0; i < row.size(); ++i) sup[i] = std::max(sup[i], row[i]);
  double total = 0.0;
  for (double s : sup) total += s;
  return total;
}

double seminorm(const VectorField& f, int order, std::span<const Vector> points, std::size_t dim,
                std::size_t base_dim, bool fiber_axes_only, Exec exec) {
  std::vector<std::size_t> axes;
  for (std::size_t i = fiber_axes_only ? base_dim : 0; i < dim; ++i) axes.push_back(i);
  return seminorm(f, order, points, axes, exec);
}

double seminorm(const VectorField& f, int order, const SampleGrid& K, std::size_t base_dim, bool fiber_axes_only,
                Exec exec) {
  const auto pts = K.points();
  return seminorm(f, order, pts, K.dim(), base_dim, fiber_axes_only, exec);
}

double norm_r(const VectorField& f, int order, const SampleGrid& K, std::size_t base_dim, bool fiber_axes_only,
              Exec exec) {
  if (order < 0 || order > 3) throw ConfigError("seminorms are supported for orders 0..3");
  const auto pts = K.points();
  double total = 0.0;
  for (int l = 0; l <= order; ++l) total += seminorm(f, l, pts, K.dim(), base_dim, fiber_axes_only, exec);
  return total;
}

GaussLegendre::GaussLegendre(std::size_t n) : nodes_(n), weights_(n) {
  if (n == 0) throw std::invalid_argument("Gauss-Legendre needs at least one node");
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const auto jd = static_cast<double>(j);
        p1 = ((2.0 * jd - 1.0) * z * p2 - (jd - 1.0) * p3) / jd;
      }
      dp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    // Recompute the derivative at the converged root for the weight.
    double p1 = 1.0;
    double p2 = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      const double p3 = p2;
      p2 = p1;
      const auto jd = static_cast<double>(j);
      p1 = ((2.0 * jd - 1.0) * z * p2 - (jd - 1.0) * p3) / jd;
    }
    dp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes_[i] = -z;
    nodes_[n - 1 - i] = z;
    weights_[i] = w;
    weights_[n - 1 - i] = w;
  }
  if (n % 2 == 1) nodes_[n / 2] = 0.0;
}

const GaussLegendre& GaussLegendre::cached(std::size_t nodes) {
  static const std::vector<GaussLegendre> table = [] {
    std::vector<GaussLegendre> t;
    for (std::size_t n = 1; n <= 128; ++n) t.emplace_back(n);
    return t;
  }();
  if (nodes == 0 || nodes > table.size()) throw std::invalid_argument("cached Gauss-Legendre rules cover 1..128 nodes");
  return table[nodes - 1];
}

double gauss_legendre(const ScalarFn& integrand, double a, double b, std::size_t nodes) {
  if (a > b) throw std::invalid_argument("gauss_legendre requires a <= b");
  if (nodes <= 128) return GaussLegendre::cached(nodes).integrate(integrand, a, b);
  return GaussLegendre(nodes).integrate(integrand, a, b);
}

}  // namespace fiberlin
