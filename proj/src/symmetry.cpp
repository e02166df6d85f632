#include "fiberlin/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fiberlin/parallel.hpp"

namespace fiberlin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Scaled {
  const HomogeneousFn& g;
  std::vector<Vector> samples;
  std::vector<double> values;
  double scale = 0.0;

  explicit Scaled(const HomogeneousFn& fn) : g(fn), samples(symmetry_samples()) {
    if (g.dim() != 2) throw ConfigError("symmetry search needs a planar function");
    for (const auto& p : samples) {
      values.push_back(g(p));
      scale = std::max(scale, std::fabs(values.back()));
    }
    if (!(scale > 0.0)) throw ConfigError("function vanishes on the probe set");
  }

  double operator()(const Eigen::Matrix2d& m) const {
    double worst = 0.0;
    for (std::size_t k = 0; k < samples.size(); ++k) {
      const double u = samples[k][0], v = samples[k][1];
      const Vector q{m(0, 0) * u + m(0, 1) * v, m(1, 0) * u + m(1, 1) * v};
      const double gp = values[k] / scale;
      worst = std::max(worst, std::fabs(g(q) / scale - gp) / (1.0 + std::fabs(gp)));
    }
    return worst;
  }
};

double cyclic_gap(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, kTwoPi - d);
}

struct Found {
  double theta;
  double res;
};

// Local minima of the residual over theta, refined by golden-section search.
std::vector<Found> sweep(const Scaled& f, bool reflect, const SymmetryOptions& opt, bool& continuous, bool& ambiguous) {
  const std::size_t n = opt.angles;
  auto make = [reflect](double th) {
    return reflect ? PlanarLinear::reflection(th).m : PlanarLinear::rotation(th).m;
  };
  auto angle = [n](std::size_t k) { return kTwoPi * static_cast<double>(k) / static_cast<double>(n); };
  const auto r = parallel_map<double>(n, [&](std::size_t k) { return f(make(angle(k))); });
  continuous = std::all_of(r.begin(), r.end(), [&](double x) { return x <= opt.tol; });
  std::vector<Found> out;
  if (continuous) return out;

  for (std::size_t k = 0; k < n; ++k) {
    const double prev = r[(k + n - 1) % n];
    const double next = r[(k + 1) % n];
    if (r[k] > prev || r[k] > next) continue;
    static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = angle(k) - kTwoPi / static_cast<double>(n);
    double hi = angle(k) + kTwoPi / static_cast<double>(n);
    double x1 = hi - inv_phi * (hi - lo), x2 = lo + inv_phi * (hi - lo);
    double f1 = f(make(x1)), f2 = f(make(x2));
    while (hi - lo > opt.refine_width) {
      if (f1 <= f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - inv_phi * (hi - lo);
        f1 = f(make(x1));
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + inv_phi * (hi - lo);
        f2 = f(make(x2));
      }
    }
    Found best{f1 <= f2 ? x1 : x2, std::min(f1, f2)};
    if (r[k] <= best.res) best = {angle(k), r[k]};
    best.theta = std::fmod(best.theta + kTwoPi, kTwoPi);
    if (best.res > opt.tol) {
      if (best.res <= 100.0 * opt.tol) ambiguous = true;
      continue;
    }
    const bool dup = std::any_of(out.begin(), out.end(), [&](const Found& o) { return cyclic_gap(o.theta, best.theta) < 1e-7; });
    if (!dup) out.push_back(best);
  }
  return out;
}

std::vector<PlanarLinear> family_samples(bool reflect) {
  std::vector<PlanarLinear> out;
  for (int k = 0; k < 8; ++k) {
    const double th = kTwoPi * (k + (k % 2 ? 0.137 : 0.0)) / 8.0;
    out.push_back(reflect ? PlanarLinear::reflection(th) : PlanarLinear::rotation(th));
  }
  return out;
}

void classify(SymmetryGroup& g) {
  g.rotations = 0;
  g.reflections = 0;
  for (const auto& e : g.elements) {
    if (e.tag == PlanarLinear::Tag::Rotation) ++g.rotations;
    if (e.tag == PlanarLinear::Tag::Reflection) ++g.reflections;
  }
  if (g.continuous_rotations && g.continuous_reflections) {
    g.kind = GroupKind::ContinuousO2;
    g.order = 0;
  } else if (g.continuous_rotations) {
    g.kind = GroupKind::ContinuousSO2PlusReflections;
    g.order = 0;
  } else if (g.hyperbolic) {
    g.kind = GroupKind::OneParamHyperbolic;
    g.order = 0;
  } else if (g.continuous_reflections) {
    g.kind = GroupKind::FiniteList;
    g.order = 0;
  } else if (g.reflections > 0) {
    g.kind = GroupKind::FiniteDihedral;
    g.order = 2 * g.rotations;
  } else if (g.rotations > 1) {
    g.kind = GroupKind::FiniteCyclic;
    g.order = g.rotations;
  } else {
    g.kind = GroupKind::Trivial;
    g.order = 1;
  }
  std::stable_sort(g.elements.begin(), g.elements.end(), [](const PlanarLinear& a, const PlanarLinear& b) {
    if (a.param != b.param) return a.param < b.param;
    return a.tag == PlanarLinear::Tag::Rotation && b.tag != PlanarLinear::Tag::Rotation;
  });
  if (!g.continuous_rotations && !g.continuous_reflections) g.closure_ok = group_closure_check(g.elements);
}

}  // namespace

PlanarLinear PlanarLinear::rotation(double theta) {
  PlanarLinear a;
  const double c = std::cos(theta), s = std::sin(theta);
  a.m << c, -s, s, c;
  a.tag = Tag::Rotation;
  a.param = theta;
  return a;
}

PlanarLinear PlanarLinear::reflection(double theta) {
  PlanarLinear a;
  const double c = std::cos(theta), s = std::sin(theta);
  a.m << c, s, s, -c;
  a.tag = Tag::Reflection;
  a.param = theta;
  return a;
}

PlanarLinear PlanarLinear::hyperbolic(double t) {
  if (!(t > 0.0)) throw ConfigError("hyperbolic parameter must be positive");
  PlanarLinear a;
  a.m << t, 0.0, 0.0, 1.0 / t;
  a.tag = Tag::Hyperbolic;
  a.param = t;
  return a;
}

PlanarLinear PlanarLinear::general(const Eigen::Matrix2d& m) {
  PlanarLinear a;
  a.m = m;
  return a;
}

Vector PlanarLinear::apply(std::span<const double> p) const {
  return {m(0, 0) * p[0] + m(0, 1) * p[1], m(1, 0) * p[0] + m(1, 1) * p[1]};
}

std::string PlanarLinear::label() const {
  switch (tag) {
    case Tag::Rotation: return "rotation";
    case Tag::Reflection: return "reflection";
    case Tag::Hyperbolic: return "hyperbolic";
    case Tag::General: break;
  }
  return "general";
}

double residual(const PlanarLinear& A, const HomogeneousFn& g, std::span<const Vector> samples) {
  double worst = 0.0;
  for (const auto& p : samples) {
    const double gp = g(p);
    worst = std::max(worst, std::fabs(g(A.apply(p)) - gp) / (1.0 + std::fabs(gp)));
  }
  return worst;
}

std::vector<Vector> symmetry_samples() {
  static const std::vector<double> radii{0.5, 1.0};
  return circle_samples(radii, 48, 0.1);
}

std::string kind_name(GroupKind kind) {
  switch (kind) {
    case GroupKind::ContinuousO2: return "continuous_O2";
    case GroupKind::ContinuousSO2PlusReflections: return "continuous_SO2_plus_reflections";
    case GroupKind::FiniteDihedral: return "finite_dihedral";
    case GroupKind::FiniteCyclic: return "finite_cyclic";
    case GroupKind::OneParamHyperbolic: return "one_param_hyperbolic";
    case GroupKind::Trivial: return "trivial";
    case GroupKind::FiniteList: return "finite_list";
  }
  return "unknown";
}

SymmetryGroup find_O2_symmetries(const HomogeneousFn& g, const SymmetryOptions& options) {
  if (options.angles < 8) throw ConfigError("angle sweep needs at least 8 angles");
  const Scaled f(g);
  SymmetryGroup out;
  const auto rots = sweep(f, false, options, out.continuous_rotations, out.ambiguous);
  const auto refs = sweep(f, true, options, out.continuous_reflections, out.ambiguous);

  if (out.continuous_rotations) {
    out.elements = family_samples(false);
  } else {
    for (const auto& r : rots) out.elements.push_back(PlanarLinear::rotation(r.theta));
  }
  if (out.continuous_reflections) {
    const auto s = family_samples(true);
    out.elements.insert(out.elements.end(), s.begin(), s.end());
  } else {
    for (const auto& r : refs) out.elements.push_back(PlanarLinear::reflection(r.theta));
  }
  for (const auto& e : out.elements) out.residual = std::max(out.residual, f(e.m));
  classify(out);
  return out;
}

HyperbolicReport detect_hyperbolic(const HomogeneousFn& g, const SymmetryOptions& options) {
  const Scaled f(g);
  HyperbolicReport rep;
  for (double t : options.hyperbolic_t) {
    rep.residuals.push_back(f(PlanarLinear::hyperbolic(t).m));
    rep.max_residual = std::max(rep.max_residual, rep.residuals.back());
  }
  rep.detected = !rep.residuals.empty() && rep.max_residual <= options.tol;
  return rep;
}

SymmetryGroup lin_group(const HomogeneousFn& g, const SymmetryOptions& options) {
  SymmetryGroup out = find_O2_symmetries(g, options);
  const HyperbolicReport hyp = detect_hyperbolic(g, options);
  out.hyperbolic = hyp.detected;
  if (hyp.detected) {
    for (double t : options.hyperbolic_t) out.hyperbolic_samples.push_back(PlanarLinear::hyperbolic(t));
    out.residual = std::max(out.residual, hyp.max_residual);
  }
  classify(out);
  return out;
}

std::vector<LeafLabeling> default_labelings(const HomogeneousFn& g, const Window2& window,
                                            const LabelingOptions& options) {
  double gmax = 0.0, gmin = 0.0;
  for (const auto& p : symmetry_samples()) {
    const double v = g(p);
    gmax = std::max(gmax, v);
    gmin = std::min(gmin, v);
  }
  const LabelingOptions& opt = options;
  std::vector<LeafLabeling> out;
  if (gmax > 0.0) out.push_back(level_components(g, 0.5 * gmax, window, opt));
  if (gmin < 0.0) out.push_back(level_components(g, 0.5 * gmin, window, opt));
  try {
    out.push_back(level_components(g, 0.0, window, opt));
  } catch (const ConfigError&) {
    // no zero leaves outside the singular set
  }
  return out;
}

SymmetryGroup linlp_group(const SymmetryGroup& lin, std::span<const LeafLabeling> labelings, double closure_tol) {
  SymmetryGroup out;
  bool all_rot = true, all_ref = true;
  for (const auto& e : lin.elements) {
    const bool keep = check_leaf_preserving([&e](std::span<const double> p) { return e.apply(p); }, labelings).pass;
    if (keep) out.elements.push_back(e);
    if (!keep && e.tag == PlanarLinear::Tag::Rotation) all_rot = false;
    if (!keep && e.tag == PlanarLinear::Tag::Reflection) all_ref = false;
  }
  out.continuous_rotations = lin.continuous_rotations && all_rot;
  out.continuous_reflections = lin.continuous_reflections && all_ref;
  if (lin.hyperbolic) {
    out.hyperbolic = std::all_of(lin.hyperbolic_samples.begin(), lin.hyperbolic_samples.end(), [&](const PlanarLinear& e) {
      return check_leaf_preserving([&e](std::span<const double> p) { return e.apply(p); }, labelings).pass;
    });
    if (out.hyperbolic) out.hyperbolic_samples = lin.hyperbolic_samples;
  }
  out.residual = lin.residual;
  out.ambiguous = lin.ambiguous;
  classify(out);
  if (!out.continuous_rotations && !out.continuous_reflections) out.closure_ok = group_closure_check(out.elements, closure_tol);
  return out;
}

bool group_closure_check(std::span<const PlanarLinear> elements, double tol) {
  for (const auto& a : elements)
    for (const auto& b : elements) {
      const Eigen::Matrix2d p = a.m * b.m;
      const bool found = std::any_of(elements.begin(), elements.end(),
                                     [&](const PlanarLinear& c) { return (c.m - p).cwiseAbs().maxCoeff() <= tol; });
      if (!found) return false;
    }
  return true;
}

}  // namespace fiberlin
