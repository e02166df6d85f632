#include "fiberlin/linearize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fiberlin/parallel.hpp"

namespace fiberlin {

namespace {

double flat(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }
double flat_derivative(double u) { return u > 0.0 ? std::exp(-1.0 / u) / (u * u) : 0.0; }

// Slack for the domain test in linhom: first-order stencils step 1e-5 * max(1, |c|) past the boundary.
constexpr double kDomainSlack = 1e-4;

Vector linspace(double lo, double hi, std::size_t n) {
  if (lo == hi || n < 2) return {lo};
  Vector out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return out;
}

// Points (x, r e) for r in `radii` and e = +-unit fiber axes.
std::vector<Vector> radial_samples(std::span<const Vector> bases, std::size_t fiber_dim, std::span<const double> radii) {
  std::vector<Vector> out;
  for (const auto& x : bases)
    for (double r : radii)
      for (std::size_t j = 0; j < fiber_dim; ++j)
        for (double sign : {1.0, -1.0}) {
          Vector p = x;
          p.resize(x.size() + fiber_dim, 0.0);
          p[x.size() + j] = sign * r;
          out.push_back(std::move(p));
        }
  return out;
}

double distance(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

BumpFunction::BumpFunction(double a, double b) : a_(a), b_(b) {
  if (!(a > 0.0) || !(b > a)) throw ConfigError("bump constants need 0 < a < b");
}

double BumpFunction::operator()(double s) const {
  if (s < 0.0) throw std::invalid_argument("mu is defined for s >= 0");
  if (s <= a_) return 0.0;
  if (s >= b_) return 1.0;
  const double u = (s - a_) / (b_ - a_);
  const double e0 = flat(u);
  const double e1 = flat(1.0 - u);
  return e0 / (e0 + e1);
}

double BumpFunction::derivative(double s) const {
  if (s <= a_ || s >= b_) return 0.0;
  const double u = (s - a_) / (b_ - a_);
  const double e0 = flat(u);
  const double e1 = flat(1.0 - u);
  const double den = e0 + e1;
  return (flat_derivative(u) * e1 + e0 * flat_derivative(1.0 - u)) / (den * den) / (b_ - a_);
}

double BumpFunction::sup_derivative(std::size_t samples) const {
  auto compute = [&] {
    double best = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
      const double s = a_ + (b_ - a_) * static_cast<double>(k) / static_cast<double>(samples - 1);
      best = std::max(best, std::fabs(derivative(s)));
    }
    return best;
  };
  if (a_ == 1.0 && b_ == 2.0 && samples == 10000) {
    static const double cached = compute();
    return cached;
  }
  return compute();
}

double mu(double s) {
  static const BumpFunction bump;
  return bump(s);
}

std::vector<Vector> base_grid(const Domain& d, std::size_t n) {
  std::vector<Vector> out{Vector{}};
  for (std::size_t i = 0; i < d.base_lo.size(); ++i) {
    std::vector<Vector> next;
    for (const auto& prefix : out)
      for (double c : linspace(d.base_lo[i], d.base_hi[i], n)) {
        Vector p = prefix;
        p.push_back(c);
        next.push_back(std::move(p));
      }
    out = std::move(next);
  }
  return out;
}

std::vector<Vector> shell_samples(const Domain& domain, std::size_t fiber_dim, double r_lo, double r_hi,
                                  std::size_t min_count, std::size_t base_points) {
  if (!(r_hi >= r_lo) || r_lo < 0.0) throw ConfigError("shell radii must satisfy 0 <= r_lo <= r_hi");
  const auto bases = base_grid(domain, base_points);
  // Unit directions: +-1 on a line, equal angles in the plane, the normalized
  // surface of a cube grid above that.
  auto directions = [fiber_dim](std::size_t level) {
    std::vector<Vector> dirs;
    if (fiber_dim == 1) return std::vector<Vector>{{1.0}, {-1.0}};
    if (fiber_dim == 2) {
      const std::size_t n = 8 * level;
      for (std::size_t k = 0; k < n; ++k) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        dirs.push_back({std::cos(a), std::sin(a)});
      }
      return dirs;
    }
    const Vector axis = linspace(-1.0, 1.0, 2 * level + 1);
    const std::size_t n = axis.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < fiber_dim; ++i) total *= n;
    for (std::size_t k = 0; k < total; ++k) {
      Vector v(fiber_dim);
      std::size_t rest = k;
      double inf = 0.0, two = 0.0;
      for (std::size_t i = fiber_dim; i-- > 0; rest /= n) {
        v[i] = axis[rest % n];
        inf = std::max(inf, std::fabs(v[i]));
        two += v[i] * v[i];
      }
      if (inf < 1.0) continue;
      for (double& c : v) c /= std::sqrt(two);
      dirs.push_back(std::move(v));
    }
    return dirs;
  };
  std::vector<Vector> fibers;
  for (std::size_t level = 1; level <= 64; ++level) {
    fibers.clear();
    const auto dirs = directions(level);
    const Vector radii = r_hi > r_lo ? linspace(r_lo, r_hi, 4 * level + 1) : Vector{r_lo};
    for (double r : radii) {
      if (r == 0.0) {
        fibers.emplace_back(fiber_dim, 0.0);
        continue;
      }
      for (const auto& d : dirs) {
        Vector v(d);
        for (double& c : v) c *= r;
        fibers.push_back(std::move(v));
      }
    }
    if (fibers.size() * bases.size() >= min_count) break;
  }
  std::vector<Vector> out;
  for (const auto& x : bases)
    for (const auto& v : fibers) {
      Vector p = x;
      p.insert(p.end(), v.begin(), v.end());
      out.push_back(std::move(p));
    }
  return out;
}

double phi(const HomotopyConfig& cfg, double t, const BundlePoint& p) {
  if (t < 0.0 || t > 1.0) throw std::invalid_argument("t must lie in [0, 1]");
  if (t == 1.0) return 1.0;
  const double m = cfg.bump(norm(p) / cfg.delta);
  if (m >= 1.0) return 1.0;
  return t + (1.0 - t) * m;
}

BundlePoint linhom(const BundleMap& h, const HomotopyConfig& cfg, double t, const BundlePoint& p) {
  if (!h.domain().contains(p, kDomainSlack)) throw DomainError("point lies outside the map's domain");
  return hadamard_homotopy(h, phi(cfg, t, p), p, cfg.quad_nodes);
}

BundleMap homotopy_map(const BundleMap& h, const HomotopyConfig& cfg, double t) {
  const std::size_t mb = h.source().base_dim;
  BundleMap::Fn fn = [h, cfg, t, mb](std::span<const double> coords) {
    return linhom(h, cfg, t, BundlePoint::split(coords, mb)).coords();
  };
  return BundleMap(h.source(), h.target(), std::move(fn), h.domain(), false);
}

JacobianBlocks homotopy_blocks(const BundleMap& h, const HomotopyConfig& cfg, double t, const BundlePoint& p) {
  return jacobian_blocks(homotopy_map(h, cfg, t), p);
}

double singular_value(const Eigen::MatrixXd& m, std::size_t k) {
  if (k == 0 || m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (k > static_cast<std::size_t>(sv.size())) return 0.0;
  return sv(static_cast<Eigen::Index>(k - 1));
}

double rank_threshold(const Eigen::MatrixXd& m) {
  const double inf_norm = m.size() == 0 ? 0.0 : m.cwiseAbs().rowwise().sum().maxCoeff();
  return 1e-8 * (1.0 + inf_norm);
}

RankReport rank_certificate(const BundleMap& h, const HomotopyConfig& cfg, std::size_t p_rank, std::size_t s_rank,
                            std::span<const Vector> base_points, std::span<const double> t_grid) {
  struct Sample {
    double sigma_p, margin_p, sigma_s, margin_s;
  };
  const std::size_t nb = base_points.size();
  const std::size_t mf = h.source().fiber_dim;
  const auto samples = parallel_map<Sample>(t_grid.size() * nb, [&](std::size_t k) {
    const double t = t_grid[k / nb];
    BundlePoint p{base_points[k % nb], Vector(mf, 0.0)};
    const JacobianBlocks blocks = homotopy_blocks(h, cfg, t, p);
    Sample s{0.0, 0.0, 0.0, 0.0};
    if (p_rank > 0) {
      s.sigma_p = singular_value(blocks.P, p_rank);
      s.margin_p = s.sigma_p - rank_threshold(blocks.P);
    }
    if (s_rank > 0) {
      s.sigma_s = singular_value(blocks.S, s_rank);
      s.margin_s = s.sigma_s - rank_threshold(blocks.S);
    }
    return s;
  });

  RankReport rep;
  rep.p_rank = p_rank;
  rep.s_rank = s_rank;
  rep.checked = samples.size();
  double worst = 0.0;
  bool first = true;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const Sample& s = samples[k];
    if (first || s.sigma_p < rep.min_sigma_p) rep.min_sigma_p = s.sigma_p;
    if (first || s.sigma_s < rep.min_sigma_s) rep.min_sigma_s = s.sigma_s;
    if (first || s.margin_p < rep.min_margin_p) rep.min_margin_p = s.margin_p;
    if (first || s.margin_s < rep.min_margin_s) rep.min_margin_s = s.margin_s;
    const double m = std::min(p_rank > 0 ? s.margin_p : INFINITY, s_rank > 0 ? s.margin_s : INFINITY);
    if (first || m < worst) {
      worst = m;
      rep.worst_t = t_grid[k / nb];
      rep.worst_point = base_points[k % nb];
      rep.worst_point.resize(rep.worst_point.size() + mf, 0.0);
    }
    first = false;
  }
  rep.pass = (p_rank == 0 || rep.min_margin_p > 0.0) && (s_rank == 0 || rep.min_margin_s > 0.0);
  if (samples.empty()) rep.pass = p_rank == 0 && s_rank == 0;
  return rep;
}

InjectivityReport injectivity_certificate(const VectorField& map, std::span<const Vector> grid, double spacing,
                                          double min_image_sep_ratio, Exec exec) {
  if (grid.size() > kMaxInjectivityPoints)
    throw ConfigError("injectivity grid exceeds " + std::to_string(kMaxInjectivityPoints) + " points");
  const auto images = parallel_map<Vector>(grid.size(), [&](std::size_t i) { return map(grid[i]); }, exec);

  struct RowBest {
    double ratio = INFINITY;
    std::size_t j = 0;
    std::size_t pairs = 0;
  };
  const double min_dist = spacing * (1.0 - 1e-9);
  const auto rows = parallel_map<RowBest>(
      grid.size(),
      [&](std::size_t i) {
        RowBest best;
        for (std::size_t j = i + 1; j < grid.size(); ++j) {
          const double d = distance(grid[i], grid[j]);
          if (d < min_dist) continue;
          ++best.pairs;
          const double r = distance(images[i], images[j]) / d;
          if (r < best.ratio) {
            best.ratio = r;
            best.j = j;
          }
        }
        return best;
      },
      exec);

  InjectivityReport rep;
  rep.required_ratio = min_image_sep_ratio;
  rep.spacing = spacing;
  rep.min_ratio = INFINITY;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    rep.pairs += rows[i].pairs;
    if (rows[i].ratio < rep.min_ratio) {
      rep.min_ratio = rows[i].ratio;
      rep.worst_i = i;
      rep.worst_j = rows[i].j;
    }
  }
  rep.pass = rep.pairs == 0 || rep.min_ratio >= min_image_sep_ratio;
  return rep;
}

double support_check(const BundleMap& h, const HomotopyConfig& cfg, std::span<const double> t_grid,
                     std::span<const Vector> outer_points) {
  const std::size_t n = outer_points.size();
  const std::size_t mb = h.source().base_dim;
  const auto res = parallel_map<double>(t_grid.size() * n, [&](std::size_t k) {
    const Vector& c = outer_points[k % n];
    const Vector lhs = linhom(h, cfg, t_grid[k / n], BundlePoint::split(c, mb)).coords();
    return distance(lhs, h(c));
  });
  double worst = 0.0;
  for (double r : res) worst = std::max(worst, r);
  return worst;
}

std::string CertificateKind::label() const {
  if (type == Type::Embedding) return "embedding";
  return "rank(" + std::to_string(p_rank) + "," + std::to_string(s_rank) + ")";
}

DeltaTrial evaluate_delta(const BundleMap& h, const CertificateKind& kind, double delta,
                          const DeltaSearchOptions& options) {
  const HomotopyConfig cfg = options.cfg.with_delta(delta);
  const Domain& dom = h.domain();
  const std::size_t mb = h.source().base_dim;
  const std::size_t mf = h.source().fiber_dim;
  const double radius = dom.fiber_radius;
  const double b = cfg.bump.b();

  const auto bases = base_grid(dom, options.base_points);
  const std::vector<double> tube_radii{0.25 * delta, 0.5 * delta, 0.75 * delta, delta};
  const auto tube = radial_samples(bases, mf, tube_radii);

  DeltaTrial trial;
  trial.delta = delta;

  // Image of the tube R_delta stays inside the codomain.
  std::optional<Domain> codomain = h.codomain();
  if (!codomain && h.source() == h.target()) codomain = dom;
  if (codomain) {
    std::vector<Vector> tube_and_zero = tube;
    for (const auto& x : bases) {
      Vector p = x;
      p.resize(mb + mf, 0.0);
      tube_and_zero.push_back(std::move(p));
    }
    const std::size_t n = tube_and_zero.size();
    const auto inside = parallel_map<char>(cfg.t_grid.size() * n, [&](std::size_t k) {
      const BundlePoint img = linhom(h, cfg, cfg.t_grid[k / n], BundlePoint::split(tube_and_zero[k % n], mb));
      return static_cast<char>(codomain->contains(img) ? 1 : 0);
    });
    trial.image_ok = std::all_of(inside.begin(), inside.end(), [](char c) { return c != 0; });
    if (!trial.image_ok) trial.note = "image of the tube leaves the codomain";
  }

  const std::size_t p_rank = kind.type == CertificateKind::Type::Embedding ? mb : kind.p_rank;
  const std::size_t s_rank = kind.type == CertificateKind::Type::Embedding ? mf : kind.s_rank;
  trial.rank = rank_certificate(h, cfg, p_rank, s_rank, bases, cfg.t_grid);
  trial.rank_ok = trial.rank.pass;

  if (kind.type == CertificateKind::Type::Embedding) {
    auto grid = domain_samples(dom, mf, options.base_points, options.fiber_points, radius);
    double spacing = 2.0 * radius / static_cast<double>(std::max<std::size_t>(options.fiber_points, 2) - 1);
    for (std::size_t i = 0; i < mb; ++i)
      if (dom.base_hi[i] > dom.base_lo[i] && options.base_points > 1)
        spacing = std::min(spacing, (dom.base_hi[i] - dom.base_lo[i]) / static_cast<double>(options.base_points - 1));
    grid.insert(grid.end(), tube.begin(), tube.end());
    trial.min_injectivity_ratio = INFINITY;
    for (double t : cfg.t_grid) {
      const BundleMap ht = homotopy_map(h, cfg, t);
      const auto rep = injectivity_certificate(ht.function(), grid, spacing, options.injectivity_ratio);
      trial.min_injectivity_ratio = std::min(trial.min_injectivity_ratio, rep.min_ratio);
      if (!rep.pass) trial.injective_ok = false;
    }
  }

  // Outside R_{b delta} nothing moves.
  std::vector<double> outer_radii;
  for (double f : {b, 1.25 * b, 1.5 * b})
    if (f * delta <= radius) outer_radii.push_back(f * delta);
  if (radius >= b * delta) outer_radii.push_back(radius);
  const auto outer = radial_samples(bases, mf, outer_radii);
  trial.support_residual = support_check(h, cfg, cfg.t_grid, outer);
  trial.support_ok = trial.support_residual <= options.support_tol;
  return trial;
}

DeltaSearchResult admissible_delta(const BundleMap& h, const CertificateKind& kind, double eps,
                                   const DeltaSearchOptions& options) {
  const Domain& dom = h.domain();
  if (!(eps > 0.0) || !(eps < dom.tube_radius()))
    throw ConfigError("epsilon must satisfy 0 < epsilon < tube radius of the domain");
  if (kind.type == CertificateKind::Type::Embedding &&
      (h.source().base_dim > h.target().base_dim || h.source().fiber_dim > h.target().fiber_dim))
    throw ConfigError("embedding certificates need source dimensions <= target dimensions");

  DeltaSearchResult result;
  {
    // t = 1 gives h itself for every delta.
    DeltaSearchOptions at_one = options;
    at_one.cfg.t_grid = {1.0};
    const DeltaTrial self = evaluate_delta(h, kind, eps, at_one);
    result.map_qualifies = self.rank_ok && self.injective_ok;
    if (!result.map_qualifies) {
      result.failure_reason = self.rank_ok ? "map is not injective on the sample grid"
                                           : "map fails the rank certificate at t = 1";
      result.trials.push_back(self);
      return result;
    }
  }
  double delta = eps;
  for (int k = 0; k <= options.max_halvings; ++k, delta *= 0.5) {
    DeltaTrial trial = evaluate_delta(h, kind, delta, options);
    const bool ok = trial.pass();
    result.trials.push_back(std::move(trial));
    if (ok) {
      result.delta = delta;
      return result;
    }
  }
  result.failure_reason = "no delta in the geometric grid passes all certificates";
  return result;
}

}  // namespace fiberlin
