#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "fiberlin/foliation.hpp"

namespace fiberlin {

struct PlanarLinear {
  enum class Tag { Rotation, Reflection, Hyperbolic, General };

  Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
  Tag tag = Tag::General;
  double param = 0.0;   ///< angle for rotations and reflections, t for diag(t, 1/t)

  static PlanarLinear rotation(double theta);
  /// [[cos, sin], [sin, -cos]]: reflection across the line at angle theta / 2.
  static PlanarLinear reflection(double theta);
  static PlanarLinear hyperbolic(double t);
  static PlanarLinear general(const Eigen::Matrix2d& m);

  Vector apply(std::span<const double> p) const;
  std::string label() const;
};

/// max |g(A p) - g(p)| / (1 + |g(p)|) over samples.
double residual(const PlanarLinear& A, const HomogeneousFn& g, std::span<const Vector> samples);

/// Default probe set: two circles (radii 0.5 and 1), 48 points each.
std::vector<Vector> symmetry_samples();

enum class GroupKind {
  ContinuousO2,
  ContinuousSO2PlusReflections,
  FiniteDihedral,
  FiniteCyclic,
  OneParamHyperbolic,
  Trivial,
  FiniteList,
};

std::string kind_name(GroupKind kind);

struct SymmetryOptions {
  double tol = 1e-8;
  std::size_t angles = 4096;
  double refine_width = 1e-12;
  std::vector<double> hyperbolic_t{0.5, 0.8, 1.25, 2.0, 5.0};
};

struct SymmetryGroup {
  GroupKind kind = GroupKind::Trivial;
  std::size_t order = 1;                 ///< 0 for continuous families
  std::vector<PlanarLinear> elements;    ///< finite part, or samples of a continuous family
  std::size_t rotations = 1;
  std::size_t reflections = 0;
  bool continuous_rotations = false;
  bool continuous_reflections = false;
  bool hyperbolic = false;
  std::vector<PlanarLinear> hyperbolic_samples;
  double residual = 0.0;                 ///< max residual over reported elements
  bool closure_ok = true;
  bool ambiguous = false;                ///< a refined minimum sat within 100 tol of the threshold
};

/// Orthogonal part of Lin(g) by an angle sweep over rotations and
/// reflections, with golden-section refinement of each local minimum.
/// Residuals use g scaled by its sample maximum, so the result does not
/// depend on positive rescaling of g.
SymmetryGroup find_O2_symmetries(const HomogeneousFn& g, const SymmetryOptions& options = {});

struct HyperbolicReport {
  bool detected = false;
  std::vector<double> residuals;         ///< per t sample
  double max_residual = 0.0;
};

HyperbolicReport detect_hyperbolic(const HomogeneousFn& g, const SymmetryOptions& options = {});

SymmetryGroup lin_group(const HomogeneousFn& g, const SymmetryOptions& options = {});

/// Levels used for leaf checks: half the sample maximum, half the sample
/// minimum when negative values occur, and 0 when the zero band is nonempty.
std::vector<LeafLabeling> default_labelings(const HomogeneousFn& g, const Window2& window = {},
                                            const LabelingOptions& options = {});

/// Subgroup of `lin` whose sampled elements preserve every labeled leaf.
SymmetryGroup linlp_group(const SymmetryGroup& lin, std::span<const LeafLabeling> labelings,
                          double closure_tol = 1e-6);

/// Every pairwise product matches a listed element entrywise within tol.
bool group_closure_check(std::span<const PlanarLinear> elements, double tol = 1e-6);

}  // namespace fiberlin
