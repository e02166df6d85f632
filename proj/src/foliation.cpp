#include "fiberlin/foliation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <numeric>

#include "fiberlin/parallel.hpp"

namespace fiberlin {

namespace {

std::vector<std::string> infer_variables(const Expr& e) {
  const auto free = free_variables(e);
  if (std::all_of(free.begin(), free.end(), [](const std::string& s) { return s == "u" || s == "v"; }))
    return {"u", "v"};
  std::size_t highest = 0;
  for (const auto& name : free) {
    if (name.size() < 2 || name[0] != 'v' || !std::all_of(name.begin() + 1, name.end(), [](unsigned char ch) { return std::isdigit(ch) != 0; }))
      throw ConfigError("cannot infer fiber variables from '" + name + "'");
    highest = std::max<std::size_t>(highest, std::stoul(name.substr(1)));
  }
  return default_variable_names("v", highest);
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

HomogeneousFn::HomogeneousFn(const std::string& expr, double degree, std::vector<std::string> vars)
    : text_(expr), degree_(degree) {
  if (!(degree > 0.0)) throw ConfigError("homogeneity degree must be positive");
  const Expr e = parse(expr);
  vars_ = vars.empty() ? infer_variables(e) : std::move(vars);
  try {
    compiled_ = CompiledExpr(e, vars_);
  } catch (const std::invalid_argument& err) {
    throw ConfigError(err.what());
  }
}

Vector HomogeneousFn::gradient(std::span<const double> v) const {
  Vector p(v.begin(), v.end());
  Vector g(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double c = p[i];
    const double h = 1e-6 * std::max(1.0, std::fabs(c));
    p[i] = c + h;
    const double fp = (*this)(p);
    p[i] = c - h;
    const double fm = (*this)(p);
    p[i] = c;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

double check_homogeneity(const HomogeneousFn& f, std::span<const Vector> samples, std::span<const double> taus) {
  double worst = 0.0;
  for (const auto& p : samples) {
    const double fp = f(p);
    for (double tau : taus) {
      Vector q(p);
      for (double& c : q) c *= tau;
      worst = std::max(worst, std::fabs(f(q) - std::pow(tau, f.degree()) * fp) / (1.0 + std::fabs(fp)));
    }
  }
  return worst;
}

double estimate_degree(const HomogeneousFn& f, std::span<const Vector> samples, double t1, double t2) {
  if (!(t1 > 0.0) || !(t2 > 0.0) || t1 == t2) throw ConfigError("degree estimate needs distinct positive taus");
  std::vector<double> ks;
  for (const auto& p : samples) {
    if (f(p) == 0.0) continue;
    Vector q1(p), q2(p);
    for (double& c : q1) c *= t1;
    for (double& c : q2) c *= t2;
    const double f1 = f(q1);
    const double f2 = f(q2);
    if (f1 == 0.0 || f2 == 0.0) continue;
    if ((f1 > 0.0) != (f2 > 0.0)) throw ConfigError("sign change under scaling: input is not homogeneous");
    ks.push_back(std::log(f1 / f2) / std::log(t1 / t2));
  }
  if (ks.empty()) throw ConfigError("no sample with nonzero value");
  std::sort(ks.begin(), ks.end());
  const std::size_t n = ks.size();
  return n % 2 ? ks[n / 2] : 0.5 * (ks[n / 2 - 1] + ks[n / 2]);
}

Vector LeafLabeling::center(std::size_t i, std::size_t j) const {
  return {window.u_lo + (static_cast<double>(i) + 0.5) * cell_u(), window.v_lo + (static_cast<double>(j) + 0.5) * cell_v()};
}

LeafLabeling level_components(const HomogeneousFn& f, double c, const Window2& window, const LabelingOptions& options) {
  if (f.dim() != 2) throw ConfigError("leaf labeling needs a planar function");
  if (options.resolution < 4) throw ConfigError("labeling resolution must be at least 4");
  if (!(window.u_hi > window.u_lo) || !(window.v_hi > window.v_lo)) throw ConfigError("empty window");

  LeafLabeling lab;
  lab.window = window;
  lab.resolution = options.resolution;
  lab.level = c;
  const std::size_t n = options.resolution;
  const double h = std::max(lab.cell_u(), lab.cell_v());
  const double mask_r = std::max(options.mask_radius_cells, f.degree() + 1.5) * h;
  lab.mask_radius = mask_r;

  const auto cells = parallel_map<char>(n * n, [&](std::size_t k) {
    const Vector p = lab.center(k % n, k / n);
    if (std::hypot(p[0], p[1]) <= mask_r) return char(2);
    double tol = 0.0;
    if (options.tol) {
      tol = *options.tol;
    } else {
      const Vector g = f.gradient(p);
      tol = std::max(1e-12 * (1.0 + std::fabs(c)), options.gradient_factor * std::hypot(g[0], g[1]) * h);
    }
    return char(std::fabs(f(p) - c) <= tol ? 1 : 0);
  });

  lab.masked.assign(n * n, 0);
  UnionFind uf(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = j * n + i;
      lab.masked[k] = cells[k] == 2;
      if (cells[k] != 1) continue;
      if (i > 0 && cells[k - 1] == 1) uf.unite(k, k - 1);
      if (j > 0 && cells[k - n] == 1) uf.unite(k, k - n);
    }

  lab.labels.assign(n * n, -1);
  std::vector<int> root_label(n * n, -1);
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t k = 0; k < n * n; ++k) {
    if (cells[k] != 1) continue;
    const std::size_t r = uf.find(k);
    if (root_label[r] < 0) {
      root_label[r] = static_cast<int>(members.size());
      members.emplace_back();
    }
    lab.labels[k] = root_label[r];
    members[static_cast<std::size_t>(root_label[r])].push_back(k);
  }
  if (members.empty()) throw ConfigError("empty band at level " + std::to_string(c));
  lab.components = members.size();

  const std::size_t want = std::max<std::size_t>(options.representatives, 1);
  for (std::size_t L = 0; L < members.size(); ++L) {
    const auto& cellsL = members[L];
    std::vector<Vector> reps;
    std::size_t last = cellsL.size();
    for (std::size_t r = 0; r < want; ++r) {
      const std::size_t idx = want == 1 ? cellsL.size() / 2 : r * (cellsL.size() - 1) / (want - 1);
      if (idx == last) continue;
      last = idx;
      const std::size_t k = cellsL[idx];
      const Vector start = lab.center(k % n, k / n);
      Vector p = start;
      for (int it = 0; it < 12; ++it) {
        const double r0 = f(p) - c;
        if (std::fabs(r0) <= 1e-13 * (1.0 + std::fabs(c))) break;
        const Vector g = f.gradient(p);
        const double g2 = g[0] * g[0] + g[1] * g[1];
        if (g2 == 0.0) break;
        p[0] -= r0 * g[0] / g2;
        p[1] -= r0 * g[1] / g2;
      }
      const auto got = window.contains(p[0], p[1]) ? leaf_label(lab, p) : std::nullopt;
      reps.push_back(got && *got == static_cast<int>(L) ? p : start);
    }
    lab.representatives.push_back(std::move(reps));
  }
  return lab;
}

std::optional<int> leaf_label(const LeafLabeling& lab, std::span<const double> p) {
  const std::size_t n = lab.resolution;
  const double du = lab.cell_u();
  const double dv = lab.cell_v();
  const double diameter = std::hypot(du, dv);
  const long ci = static_cast<long>(std::floor((p[0] - lab.window.u_lo) / du));
  const long cj = static_cast<long>(std::floor((p[1] - lab.window.v_lo) / dv));
  double best = INFINITY;
  std::optional<int> label;
  for (long j = cj - 2; j <= cj + 2; ++j)
    for (long i = ci - 2; i <= ci + 2; ++i) {
      if (i < 0 || j < 0 || i >= static_cast<long>(n) || j >= static_cast<long>(n)) continue;
      const int L = lab.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      if (L < 0) continue;
      const Vector q = lab.center(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      const double d = std::hypot(q[0] - p[0], q[1] - p[1]);
      if (d <= diameter && d < best) {
        best = d;
        label = L;
      }
    }
  return label;
}

LeafCheck check_leaf_preserving(const PlaneMap& A, std::span<const LeafLabeling> labelings) {
  LeafCheck out;
  for (const auto& lab : labelings)
    for (std::size_t L = 0; L < lab.representatives.size(); ++L)
      for (const auto& p : lab.representatives[L]) {
        const Vector q = A(p);
        const double near_mask = lab.mask_radius + std::hypot(lab.cell_u(), lab.cell_v());
        if (!lab.window.contains(q[0], q[1]) || std::hypot(q[0], q[1]) <= near_mask) {
          ++out.escapes;
          continue;
        }
        ++out.checked;
        const auto got = leaf_label(lab, q);
        if (got && *got == static_cast<int>(L)) continue;
        ++out.violations;
        if (out.details.size() < 16)
          out.details.push_back("level " + std::to_string(lab.level) + " leaf " + std::to_string(L) + " -> " +
                                (got ? "leaf " + std::to_string(*got) : std::string("outside band")));
      }
  out.pass = out.violations == 0;
  return out;
}

LeafInvariance check_homotopy_leaf_invariance(const BundleMap& h, const HomogeneousFn& f, const HomotopyConfig& cfg,
                                              std::span<const double> t_grid, std::span<const Vector> samples) {
  if (f.dim() != h.source().fiber_dim || f.dim() != h.target().fiber_dim)
    throw ConfigError("function dimension does not match the fiber");
  const std::size_t mb = h.source().base_dim;
  LeafInvariance out;
  for (const auto& w : samples) {
    const BundlePoint p = BundlePoint::split(w, mb);
    out.precondition_residual = std::max(out.precondition_residual, std::fabs(f(h(p).v) - f(p.v)));
  }
  out.precondition_ok = out.precondition_residual <= kInvariancePrecondition;

  const std::size_t n = samples.size();
  const auto res = parallel_map<double>(t_grid.size() * n, [&](std::size_t k) {
    const BundlePoint p = BundlePoint::split(samples[k % n], mb);
    const double fw = f(p.v);
    return std::fabs(f(linhom(h, cfg, t_grid[k / n], p).v) - fw) / (1.0 + std::fabs(fw));
  });
  for (std::size_t k = 0; k < res.size(); ++k)
    if (res[k] > out.residual) {
      out.residual = res[k];
      out.worst_t = t_grid[k / n];
    }
  return out;
}

std::vector<Vector> circle_samples(std::span<const double> radii, std::size_t count, double offset) {
  std::vector<Vector> out;
  for (double r : radii)
    for (std::size_t k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * (static_cast<double>(k) + offset) / static_cast<double>(count);
      out.push_back({r * std::cos(a), r * std::sin(a)});
    }
  return out;
}

}  // namespace fiberlin
