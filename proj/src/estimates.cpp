#include "fiberlin/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fiberlin/parallel.hpp"

namespace fiberlin {

namespace {

VectorField base_part(const BundleMap& h) {
  const std::size_t nb = h.target().base_dim;
  return [h, nb](std::span<const double> c) {
    Vector img = h(c);
    img.resize(nb);
    return img;
  };
}

VectorField fiber_part(const BundleMap& h) {
  const std::size_t nb = h.target().base_dim;
  return [h, nb](std::span<const double> c) {
    Vector img = h(c);
    img.erase(img.begin(), img.begin() + static_cast<std::ptrdiff_t>(nb));
    return img;
  };
}

std::vector<std::size_t> axis_range(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> out(hi - lo);
  std::iota(out.begin(), out.end(), lo);
  return out;
}

}  // namespace

Vector deviation_x(const BundleMap& h, const HomotopyConfig& cfg, double t, const BundlePoint& p) {
  const BundlePoint hp = h(p);
  const BundlePoint H = linhom(h, cfg, t, p);
  Vector out(hp.x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = hp.x[i] - H.x[i];
  return out;
}

Vector deviation_r(const BundleMap& h, const HomotopyConfig& cfg, double t, const BundlePoint& p) {
  const BundlePoint hp = h(p);
  const BundlePoint H = linhom(h, cfg, t, p);
  Vector out(hp.v.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = hp.v[i] - H.v[i];
  return out;
}

EstimateBounds EstimateBounds::compute(const BundleMap& h, std::span<const Vector> K, const BumpFunction& bump) {
  const std::size_t mb = h.source().base_dim;
  const std::size_t dim = h.source().total_dim();
  const auto fiber_axes = axis_range(mb, dim);
  const auto all_axes = axis_range(0, dim);
  const VectorField a = base_part(h);
  const VectorField b = fiber_part(h);

  EstimateBounds e;
  e.fiber_dim = h.source().fiber_dim;
  e.mu1 = bump.sup_derivative();
  if (h.target().base_dim > 0) {
    e.a1m = seminorm(a, 1, K, fiber_axes);
    e.a2 = seminorm(a, 2, K, all_axes);
  }
  e.b2m = seminorm(b, 2, K, fiber_axes);
  e.b3m = seminorm(b, 3, K, fiber_axes);
  e.b3 = seminorm(b, 3, K, all_axes);
  return e;
}

bool EstimateReport::pass() const {
  return std::all_of(records.begin(), records.end(), [](const EstimateRecord& r) { return r.pass; });
}

std::vector<Vector> estimate_samples(const Domain& domain, std::size_t fiber_dim, double delta,
                                     std::size_t base_points, std::size_t fiber_points) {
  auto out = domain_samples(domain, fiber_dim, base_points, fiber_points, domain.fiber_radius);
  const double tube = std::min(2.5 * delta, domain.fiber_radius);
  auto fine = domain_samples(domain, fiber_dim, base_points, 2 * fiber_points + 1, tube);
  out.insert(out.end(), fine.begin(), fine.end());
  return out;
}

EstimateReport verify_estimates(const BundleMap& h, const HomotopyConfig& cfg, double t, std::span<const Vector> K,
                                const EstimateBounds* bounds) {
  const EstimateBounds e = bounds ? *bounds : EstimateBounds::compute(h, K, cfg.bump);
  const std::size_t mb = h.source().base_dim;

  struct Sample {
    double x, r, P, R, S;
  };
  const auto samples = parallel_map<Sample>(K.size(), [&](std::size_t i) {
    const BundlePoint p = BundlePoint::split(K[i], mb);
    const BundlePoint hp = h(p);
    const BundlePoint H = linhom(h, cfg, t, p);
    Sample s{};
    for (std::size_t k = 0; k < hp.x.size(); ++k) s.x += std::fabs(hp.x[k] - H.x[k]);
    for (std::size_t k = 0; k < hp.v.size(); ++k) s.r += std::fabs(hp.v[k] - H.v[k]);
    const JacobianBlocks bh = homotopy_blocks(h, cfg, t, p);
    const JacobianBlocks b0 = jacobian_blocks(h, p);
    s.P = entry_sum(bh.P - b0.P);
    s.R = entry_sum(bh.R - b0.R);
    s.S = entry_sum(bh.S - b0.S);
    return s;
  });

  const double d = cfg.delta;
  const double m = static_cast<double>(e.fiber_dim);
  EstimateReport rep;
  rep.delta = d;
  rep.t = t;
  rep.points = K.size();
  rep.records = {
      {"x", 0.0, d * e.a1m, 0.0, true, {}},
      {"r", 0.0, d * d * e.b2m, 0.0, true, {}},
      {"P", 0.0, d * e.a2, 0.0, true, {}},
      {"R", 0.0, d * d * e.b3, kThirdOrderAllowance, true, {}},
      {"S", 0.0, d * (2.0 * e.b2m + d * e.b3m + m * e.mu1 * e.b2m), kThirdOrderAllowance, true, {}},
  };
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::array<double, 5> v{samples[i].x, samples[i].r, samples[i].P, samples[i].R, samples[i].S};
    for (std::size_t k = 0; k < 5; ++k)
      if (v[k] > rep.records[k].lhs) {
        rep.records[k].lhs = v[k];
        rep.records[k].worst_point = K[i];
      }
  }
  for (auto& r : rep.records)
    r.pass = r.lhs <= r.rhs * (1.0 + kEstimateSlack) + r.allowance + kRoundoffFloor;
  return rep;
}

ContinuityReport block_continuity_probe(const BundleMap& h, const HomotopyConfig& cfg, double t,
                                        std::span<const double> deltas, std::span<const Vector> base_points) {
  static constexpr std::array<double, 6> kRadii{0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
  const std::size_t mb = h.source().base_dim;
  const std::size_t mf = h.source().fiber_dim;
  const double radius = h.domain().fiber_radius;

  ContinuityReport rep;
  rep.t = t;
  for (double d : deltas) {
    const HomotopyConfig c = cfg.with_delta(d);
    std::vector<Vector> pts;
    for (const auto& x : base_points)
      for (double s : kRadii) {
        if (s * d > radius * (1.0 + 1e-12)) continue;
        for (std::size_t j = 0; j < mf; ++j)
          for (double sign : {1.0, -1.0}) {
            Vector p = x;
            p.resize(mb + mf, 0.0);
            p[mb + j] = sign * s * d;
            pts.push_back(std::move(p));
          }
      }
    const auto gaps = parallel_map<std::array<double, 3>>(pts.size(), [&](std::size_t i) {
      const BundlePoint p = BundlePoint::split(pts[i], mb);
      const JacobianBlocks bh = homotopy_blocks(h, c, t, p);
      const JacobianBlocks b0 = jacobian_blocks(h, p);
      return std::array<double, 3>{entry_sum(bh.P - b0.P), entry_sum(bh.R - b0.R), entry_sum(bh.S - b0.S)};
    });
    const auto qgaps = parallel_map<double>(base_points.size(), [&](std::size_t i) {
      BundlePoint p{base_points[i], Vector(mf, 0.0)};
      return entry_sum(homotopy_blocks(h, c, 0.0, p).Q - jacobian_blocks(h, p).Q);
    });
    BlockGaps g;
    g.delta = d;
    for (const auto& a : gaps) {
      g.P = std::max(g.P, a[0]);
      g.R = std::max(g.R, a[1]);
      g.S = std::max(g.S, a[2]);
    }
    for (double q : qgaps) g.Q = std::max(g.Q, q);
    rep.gaps.push_back(g);
  }
  return rep;
}

bool shrinks_linearly(double gap_large, double gap_small, double min_ratio, double floor) {
  if (gap_small <= floor) return true;
  return gap_large >= min_ratio * gap_small;
}

}  // namespace fiberlin
