#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fiberlin/expr.hpp"
#include "fiberlin/linearize.hpp"

namespace fiberlin {

/// g(v) on the fiber with a declared degree k > 0, meant to satisfy
/// g(tau v) = tau^k g(v) for tau > 0.
class HomogeneousFn {
public:
  /// Variables default to u, v for the plane and v1.. otherwise.
  HomogeneousFn(const std::string& expr, double degree, std::vector<std::string> vars = {});

  double operator()(std::span<const double> v) const { return compiled_(v); }
  /// Central-difference gradient.
  Vector gradient(std::span<const double> v) const;

  double degree() const noexcept { return degree_; }
  std::size_t dim() const noexcept { return vars_.size(); }
  const std::string& text() const noexcept { return text_; }
  const std::vector<std::string>& variables() const noexcept { return vars_; }

private:
  std::string text_;
  double degree_;
  std::vector<std::string> vars_;
  CompiledExpr compiled_;
};

/// max |f(tau v) - tau^k f(v)| / (1 + |f(v)|) over samples and taus.
double check_homogeneity(const HomogeneousFn& f, std::span<const Vector> samples, std::span<const double> taus);

/// Median over samples of log(f(t1 v) / f(t2 v)) / log(t1 / t2). Samples with
/// f = 0 are skipped; a sign change between the two evaluations throws
/// ConfigError.
double estimate_degree(const HomogeneousFn& f, std::span<const Vector> samples, double t1, double t2);

struct Window2 {
  double u_lo = -2.0;
  double u_hi = 2.0;
  double v_lo = -2.0;
  double v_hi = 2.0;

  bool contains(double u, double v) const { return u >= u_lo && u <= u_hi && v >= v_lo && v <= v_hi; }
};

struct LabelingOptions {
  std::size_t resolution = 256;          ///< cells per axis
  std::optional<double> tol;             ///< fixed band half-width; gradient-scaled when unset
  double gradient_factor = 1.0;          ///< band |f - c| <= factor |grad f| h
  double mask_radius_cells = 2.5;        ///< origin disk removed as the singular set (at least k + 1.5)
  std::size_t representatives = 8;       ///< per component
};

/// Grid components of the band {|f - c| <= tol} minus the singular set.
struct LeafLabeling {
  Window2 window;
  std::size_t resolution = 0;
  double level = 0.0;
  std::vector<int> labels;               ///< per cell, row-major in v then u; -1 outside the band
  std::vector<char> masked;
  double mask_radius = 0.0;              ///< radius of the removed disk around the origin
  std::size_t components = 0;
  std::vector<std::vector<Vector>> representatives;   ///< points on the level set, per label

  double cell_u() const { return (window.u_hi - window.u_lo) / static_cast<double>(resolution); }
  double cell_v() const { return (window.v_hi - window.v_lo) / static_cast<double>(resolution); }
  Vector center(std::size_t i, std::size_t j) const;   ///< i along u, j along v
  int at(std::size_t i, std::size_t j) const { return labels[j * resolution + i]; }
};

/// Throws ConfigError when the band is empty or f is not planar.
LeafLabeling level_components(const HomogeneousFn& f, double c, const Window2& window,
                              const LabelingOptions& options = {});

/// Label of the nearest band cell within one cell diameter of p, or nullopt.
std::optional<int> leaf_label(const LeafLabeling& labeling, std::span<const double> p);

using PlaneMap = std::function<Vector(std::span<const double>)>;

struct LeafCheck {
  bool pass = true;
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::size_t escapes = 0;               ///< images outside the window or inside the singular disk
  std::vector<std::string> details;
};

/// Each representative p of each labeled leaf must satisfy
/// leaf_label(A(p)) == leaf_label(p).
LeafCheck check_leaf_preserving(const PlaneMap& A, std::span<const LeafLabeling> labelings);

struct LeafInvariance {
  bool precondition_ok = true;
  double precondition_residual = 0.0;    ///< max |f(h(w)) - f(w)| over samples
  double residual = 0.0;                 ///< max |f(H(w)) - f(w)| / (1 + |f(w)|) over samples and t
  double worst_t = 0.0;
};

inline constexpr double kInvariancePrecondition = 1e-9;

/// f evaluated on the fiber part of the homotopy images; f must be defined
/// on h's fiber dimension.
LeafInvariance check_homotopy_leaf_invariance(const BundleMap& h, const HomogeneousFn& f, const HomotopyConfig& cfg,
                                              std::span<const double> t_grid, std::span<const Vector> samples);

/// Points on circles of the given radii, `count` per circle, at angles
/// 2 pi (k + offset) / count.
std::vector<Vector> circle_samples(std::span<const double> radii, std::size_t count, double offset = 0.1);

}  // namespace fiberlin
