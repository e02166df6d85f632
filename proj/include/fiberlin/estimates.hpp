#pragma once

#include <array>
#include <string>
#include <vector>

#include "fiberlin/linearize.hpp"

namespace fiberlin {

/// x_t = a(x, v) - a(x, phi v): base coordinates of h minus those of H.
Vector deviation_x(const BundleMap& h, const HomotopyConfig& cfg, double t, const BundlePoint& p);

/// r_t = b(x, v) - fiber coordinates of H(h, delta, t)(x, v).
Vector deviation_r(const BundleMap& h, const HomotopyConfig& cfg, double t, const BundlePoint& p);

inline constexpr double kEstimateSlack = 1e-6;
inline constexpr double kThirdOrderAllowance = 1e-4;
/// Absolute floor below which a left-hand side counts as rounding noise.
inline constexpr double kRoundoffFloor = 1e-12;

/// Seminorms of h on K entering the right-hand sides.
struct EstimateBounds {
  double a1m = 0.0;   ///< |a|_{1,m,K}, fiber derivatives
  double a2 = 0.0;    ///< |a|_{2,K}, all derivatives
  double b2m = 0.0;   ///< |b|_{2,m,K}
  double b3m = 0.0;   ///< |b|_{3,m,K}
  double b3 = 0.0;    ///< |b|_{3,K}
  double mu1 = 0.0;   ///< sup |mu'|
  std::size_t fiber_dim = 0;

  static EstimateBounds compute(const BundleMap& h, std::span<const Vector> K, const BumpFunction& bump);
};

struct EstimateRecord {
  std::string name;     ///< x, r, P, R or S
  double lhs = 0.0;
  double rhs = 0.0;
  double allowance = 0.0;
  bool pass = true;
  Vector worst_point;
};

struct EstimateReport {
  double delta = 0.0;
  double t = 0.0;
  std::size_t points = 0;
  std::vector<EstimateRecord> records;
  bool pass() const;
};

/// Samples for verify_estimates: a grid over the whole domain plus a finer
/// grid over the tube of radius 2.5 delta (clipped to the domain).
std::vector<Vector> estimate_samples(const Domain& domain, std::size_t fiber_dim, double delta,
                                     std::size_t base_points, std::size_t fiber_points);

/// Checks the five deviation inequalities on K at one (delta, t). The
/// seminorms are recomputed unless `bounds` is given.
EstimateReport verify_estimates(const BundleMap& h, const HomotopyConfig& cfg, double t, std::span<const Vector> K,
                                const EstimateBounds* bounds = nullptr);

struct BlockGaps {
  double delta = 0.0;
  double P = 0.0;
  double Q = 0.0;   ///< at zero-section points and t = 0
  double R = 0.0;
  double S = 0.0;
};

struct ContinuityReport {
  double t = 0.0;
  std::vector<BlockGaps> gaps;   ///< one entry per delta, in the given order
};

/// Max entry-sum gaps between the blocks of H(h, delta, t) and of h at points
/// (x, s delta e) with s in {0.25, .., 1.5} and e = +-unit fiber vectors, and
/// the Q gap at (x, 0) for t = 0.
ContinuityReport block_continuity_probe(const BundleMap& h, const HomotopyConfig& cfg, double t,
                                        std::span<const double> deltas, std::span<const Vector> base_points);

/// Gap ratio test used for the delta sweep: gap(first)/gap(last) >= min_ratio,
/// or the last gap is already at the difference-quotient floor.
bool shrinks_linearly(double gap_large, double gap_small, double min_ratio = 3.5, double floor = 1e-6);

}  // namespace fiberlin
