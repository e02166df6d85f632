#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fiberlin/bundle.hpp"
#include "fiberlin/bundle_map.hpp"
#include "fiberlin/calculus.hpp"
#include "fiberlin/hadamard.hpp"

namespace fiberlin {

/// Smooth non-decreasing step: 0 on [0, a], 1 on [b, inf), and
/// sigma((s - a) / (b - a)) in between with
/// sigma(u) = e(u) / (e(u) + e(1 - u)), e(u) = exp(-1/u) for u > 0.
class BumpFunction {
public:
  BumpFunction() = default;
  BumpFunction(double a, double b);

  double operator()(double s) const;
  double derivative(double s) const;
  /// |mu|_1 = max |mu'| over [a, b] sampled at `samples` points (cached for the default).
  double sup_derivative(std::size_t samples = 10000) const;

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }

private:
  double a_ = 1.0;
  double b_ = 2.0;
};

/// mu for the default constants a = 1, b = 2. Throws std::invalid_argument for s < 0.
double mu(double s);

struct HomotopyConfig {
  double delta = 0.1;
  BumpFunction bump;
  std::size_t quad_nodes = kDefaultQuadNodes;
  std::vector<double> t_grid{0.0, 0.25, 0.5, 0.75, 1.0};

  HomotopyConfig with_delta(double d) const {
    HomotopyConfig c(*this);
    c.delta = d;
    return c;
  }
};

/// t + (1 - t) mu(norm(p) / delta); exactly 1 once mu saturates or t = 1.
double phi(const HomotopyConfig& cfg, double t, const BundlePoint& p);

/// H(h, delta, t)(p) = g(phi(t, p), p). Throws DomainError if p lies outside h's domain.
BundlePoint linhom(const BundleMap& h, const HomotopyConfig& cfg, double t, const BundlePoint& p);

/// The map w -> H(h, delta, t)(w) on concatenated coordinates.
BundleMap homotopy_map(const BundleMap& h, const HomotopyConfig& cfg, double t);

JacobianBlocks homotopy_blocks(const BundleMap& h, const HomotopyConfig& cfg, double t, const BundlePoint& p);

/// k-th largest singular value (1-based); 0 when k exceeds the smaller dimension.
double singular_value(const Eigen::MatrixXd& m, std::size_t k);

/// 1e-8 * (1 + max row sum of |m|).
double rank_threshold(const Eigen::MatrixXd& m);

struct RankReport {
  bool pass = true;
  std::size_t p_rank = 0;
  std::size_t s_rank = 0;
  double min_sigma_p = 0.0;     ///< worst sigma_{p_rank}(P) seen
  double min_sigma_s = 0.0;     ///< worst sigma_{s_rank}(S) seen
  double min_margin_p = 0.0;    ///< worst sigma - threshold for P
  double min_margin_s = 0.0;
  double worst_t = 0.0;
  Vector worst_point;
  std::size_t checked = 0;
};

/// Rank persistence of the P and S blocks of H(h, delta, t) at zero-section
/// points (x, 0) for every t in t_grid.
RankReport rank_certificate(const BundleMap& h, const HomotopyConfig& cfg, std::size_t p_rank, std::size_t s_rank,
                            std::span<const Vector> base_points, std::span<const double> t_grid);

inline constexpr double kDefaultInjectivityRatio = 1e-3;

struct InjectivityReport {
  bool pass = true;
  double min_ratio = 0.0;       ///< smallest image/domain distance ratio over checked pairs
  double required_ratio = kDefaultInjectivityRatio;
  double spacing = 0.0;
  std::size_t pairs = 0;
  std::size_t worst_i = 0;
  std::size_t worst_j = 0;
};

inline constexpr std::size_t kMaxInjectivityPoints = 4096;

/// Pairwise separation test on a grid: every pair at domain distance >=
/// spacing must have image distance >= ratio * distance. Throws ConfigError
/// above kMaxInjectivityPoints points.
InjectivityReport injectivity_certificate(const VectorField& map, std::span<const Vector> grid, double spacing,
                                          double min_image_sep_ratio = kDefaultInjectivityRatio,
                                          Exec exec = default_exec());

/// Max over t and points of |H(h, delta, t)(p) - h(p)|. Points are expected
/// to satisfy norm >= b delta.
double support_check(const BundleMap& h, const HomotopyConfig& cfg, std::span<const double> t_grid,
                     std::span<const Vector> outer_points);

struct CertificateKind {
  enum class Type { Rank, Embedding };
  Type type = Type::Embedding;
  std::size_t p_rank = 0;
  std::size_t s_rank = 0;

  static CertificateKind rank(std::size_t a, std::size_t b) { return {Type::Rank, a, b}; }
  static CertificateKind embedding() { return {Type::Embedding, 0, 0}; }
  std::string label() const;
};

struct DeltaSearchOptions {
  HomotopyConfig cfg;              ///< delta is overwritten by the search
  std::size_t base_points = 5;     ///< per base axis
  std::size_t fiber_points = 11;   ///< per fiber axis
  double injectivity_ratio = kDefaultInjectivityRatio;
  double support_tol = 1e-12;
  int max_halvings = 20;
};

struct DeltaTrial {
  double delta = 0.0;
  bool image_ok = true;
  bool rank_ok = true;
  bool injective_ok = true;
  bool support_ok = true;
  double support_residual = 0.0;
  double min_injectivity_ratio = 0.0;
  RankReport rank;
  std::string note;
  bool pass() const { return image_ok && rank_ok && injective_ok && support_ok; }
};

struct DeltaSearchResult {
  std::optional<double> delta;
  bool map_qualifies = false;      ///< h itself passes the certificates (t = 1)
  std::string failure_reason;
  std::vector<DeltaTrial> trials;
};

/// Largest delta in {eps 2^-k : k = 0..max_halvings} for which every t in the
/// grid keeps H inside the codomain on R_delta, passes the kind's
/// certificates, and leaves h untouched outside R_{b delta}.
DeltaSearchResult admissible_delta(const BundleMap& h, const CertificateKind& kind, double eps,
                                   const DeltaSearchOptions& options);

/// Tensor grid over the base box, `per_axis` points per axis (one on degenerate axes).
std::vector<Vector> base_grid(const Domain& domain, std::size_t per_axis);

/// Base grid times fiber points r d for radii r in [r_lo, r_hi] and unit
/// directions d, refined until at least min_count points are produced.
std::vector<Vector> shell_samples(const Domain& domain, std::size_t fiber_dim, double r_lo, double r_hi,
                                  std::size_t min_count, std::size_t base_points = 5);

/// Evaluates one delta candidate (exposed for reports and tests).
DeltaTrial evaluate_delta(const BundleMap& h, const CertificateKind& kind, double delta,
                          const DeltaSearchOptions& options);

}  // namespace fiberlin
