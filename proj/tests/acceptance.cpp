// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "fiberlin/estimates.hpp"
#include "fiberlin/foliation.hpp"
#include "fiberlin/hadamard.hpp"
#include "fiberlin/linearize.hpp"
#include "fiberlin/symmetry.hpp"

using namespace fiberlin;
namespace fs = std::filesystem;

namespace {

const std::vector<double> kTGrid{0.0, 0.25, 0.5, 0.75, 1.0};
const std::vector<double> kDeltas{0.2, 0.1, 0.05};

struct CorpusMap {
  std::string name;
  BundleMap h;
  std::function<Vector(const Vector&)> tangent;   // analytic T_fib h on concatenated coordinates
};

std::vector<CorpusMap> corpus() {
  const Domain unit{{0.0}, {1.0}, 1.0};
  const Domain point{{}, {}, 1.0};
  std::vector<CorpusMap> c;
  const auto same = [](const Vector& w) { return w; };
  c.push_back({"identity", BundleMap::from_expressions(1, 1, {"x"}, {"v"}, unit), same});
  c.push_back({"cubic", BundleMap::from_expressions(0, 1, {}, {"v + v^3"}, point), same});
  c.push_back({"sine", BundleMap::from_expressions(0, 1, {}, {"sin(v)"}, point), same});
  c.push_back({"exp_fiber",
               BundleMap::from_expressions(1, 1, {"x + v^2"}, {"v*exp(x)"}, Domain{{0.0}, {1.0}, 0.5})
                   .with_codomain(Domain{{0.0}, {2.0}, 2.0}),
               [](const Vector& w) { return Vector{w[0], std::exp(w[0]) * w[1]}; }});
  c.push_back({"two_fiber",
               BundleMap::from_expressions(1, 2, {"x"}, {"v1 + v2^2", "v2 + v1*v2"}, Domain{{0.0}, {1.0}, 0.3}),
               same});
  c.push_back({"rotation_flow",
               BundleMap::from_expressions(
                   0, 2, {}, {"cos(v1^2+v2^2)*v1 - sin(v1^2+v2^2)*v2", "sin(v1^2+v2^2)*v1 + cos(v1^2+v2^2)*v2"},
                   point),
               same});
  return c;
}

HomotopyConfig config(double delta) {
  HomotopyConfig c;
  c.delta = delta;
  return c;
}

double dist(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

double l2(const Vector& a) { return dist(a, Vector(a.size(), 0.0)); }

int failures = 0;

void report(int n, bool pass, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", n, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

void endpoints() {
  const double delta = 0.1;
  double worst1 = 0.0, worst0 = 0.0;
  std::size_t min_points = SIZE_MAX;
  for (const auto& m : corpus()) {
    const std::size_t mb = m.h.source().base_dim;
    const double r = config(delta).bump.a() * delta;
    std::vector<Vector> pts;
    for (std::size_t n = 11; pts.size() < 1000; n = 2 * n - 1) {
      pts = domain_samples(m.h.domain(), m.h.source().fiber_dim, 5, n, r);
      std::erase_if(pts, [&](const Vector& w) { return l2(Vector(w.begin() + mb, w.end())) > r; });
    }
    min_points = std::min(min_points, pts.size());
    for (const Vector& w : pts) {
      const BundlePoint p = BundlePoint::split(w, mb);
      worst1 = std::max(worst1, dist(linhom(m.h, config(delta), 1.0, p).coords(), m.h(w)));
      worst0 = std::max(worst0, dist(linhom(m.h, config(delta), 0.0, p).coords(), m.tangent(w)));
    }
  }
  report(1, worst1 <= 1e-12 && worst0 <= 1e-8 && min_points >= 1000, "homotopy endpoints",
         fmt("|H1-h| %.2e, |H0-Tfib| %.2e, >= %.0f points per map", worst1, worst0, double(min_points)));
}

void support() {
  double worst = 0.0;
  std::size_t points = 0;
  for (const auto& m : corpus())
    for (double delta : kDeltas) {
      const HomotopyConfig cfg = config(delta);
      const double r_lo = cfg.bump.b() * delta, r_hi = m.h.domain().tube_radius();
      if (r_lo > r_hi) continue;
      auto pts = shell_samples(m.h.domain(), m.h.source().fiber_dim, r_lo, r_hi, 500);
      std::erase_if(pts, [&](const Vector& w) { return l2(Vector(w.begin() + m.h.source().base_dim, w.end())) < r_lo; });
      points += pts.size();
      worst = std::max(worst, support_check(m.h, cfg, kTGrid, pts));
    }
  report(2, worst <= 1e-12 && points > 0, "support outside the b-delta tube",
         fmt("max residual %.2e over %.0f points", worst, double(points)));
}

void hadamard() {
  double worst = 0.0, worst_limit = 0.0;
  for (const auto& m : corpus()) {
    const auto pts = domain_samples(m.h.domain(), m.h.source().fiber_dim, 5, 9, m.h.domain().tube_radius());
    const std::size_t mb = m.h.source().base_dim;
    for (const Vector& w : pts) {
      const BundlePoint p = BundlePoint::split(w, mb);
      for (double tau : {0.1, 0.5, 1.0}) {
        const double scale_ref = std::max(l2(m.h(scale(tau, p).coords())), 1e-300);
        for (auto route : {HadamardRoute::Dispatch, HadamardRoute::Quadrature}) {
          const double r = check_hadamard_identity(m.h, tau, p, kDefaultQuadNodes, route);
          worst = std::max(worst, r == 0.0 ? 0.0 : r / scale_ref);
        }
      }
      if (norm(p) > 0.0) {
        const Vector lim = fiber_tangent_limit(m.h, p).value;
        const Vector ft = fiber_tangent(m.h)(p).v;
        worst_limit = std::max(worst_limit, dist(lim, ft));
      }
    }
  }
  report(3, worst <= 1e-8 && worst_limit <= 1e-6, "Hadamard identity",
         fmt("relative residual %.2e, tangent cross-oracle %.2e", worst, worst_limit));
}

void block_law() {
  double worst = 0.0;
  for (const auto& m : corpus()) {
    const auto base = base_grid(m.h.domain(), 5);
    for (double tau : {0.0, 0.5, 1.0}) {
      const BundleMap g = hadamard_slice(m.h, tau);
      for (const Vector& x : base) {
        const BundlePoint p{x, Vector(m.h.source().fiber_dim, 0.0)};
        const JacobianBlocks gb = jacobian_blocks(g, p);
        const JacobianBlocks hb = jacobian_blocks(m.h, p);
        const auto gap = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
          return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
        };
        worst = std::max({worst, gap(gb.P, hb.P), gap(gb.Q, tau * hb.Q), gap(gb.S, hb.S),
                          gb.R.size() == 0 ? 0.0 : gb.R.cwiseAbs().maxCoeff()});
      }
    }
  }
  report(4, worst <= 1e-4, "Jacobian block law on the zero section", fmt("max entry gap %.2e", worst));
}

void estimates() {
  std::size_t runs = 0, passed = 0, ratio_checks = 0, ratio_ok = 0;
  double worst_ratio = 1e300;
  for (const auto& m : corpus()) {
    for (double delta : kDeltas) {
      const auto K = estimate_samples(m.h.domain(), m.h.source().fiber_dim, delta, 5, 11);
      const EstimateBounds b = EstimateBounds::compute(m.h, K, BumpFunction{});
      for (double t : kTGrid) {
        ++runs;
        const EstimateReport r = verify_estimates(m.h, config(delta), t, K, &b);
        if (r.pass()) ++passed;
        else
          for (const auto& rec : r.records)
            if (!rec.pass)
              std::printf("  %s delta=%g t=%g %s lhs=%.3e rhs=%.3e\n", m.name.c_str(), delta, t, rec.name.c_str(),
                          rec.lhs, rec.rhs);
      }
    }
    const auto base = base_grid(m.h.domain(), 5);
    for (double t : kTGrid) {
      const ContinuityReport c = block_continuity_probe(m.h, config(kDeltas.front()), t, kDeltas, base);
      const BlockGaps& lo = c.gaps.front();
      const BlockGaps& hi = c.gaps.back();
      for (auto [a, z] : {std::pair{lo.P, hi.P}, std::pair{lo.S, hi.S}}) {
        ++ratio_checks;
        if (shrinks_linearly(a, z)) ++ratio_ok;
        if (z > 1e-6) worst_ratio = std::min(worst_ratio, a / z);
      }
    }
  }
  report(5, passed == runs && ratio_ok == ratio_checks, "estimate inequalities and linear gap decay",
         fmt("%.0f/%.0f runs pass, worst P/S gap ratio %.2f", double(passed), double(runs), worst_ratio) + ", " +
             std::to_string(ratio_ok) + "/" + std::to_string(ratio_checks) + " ratio checks");
}

void discontinuity() {
  const BundleMap h = BundleMap::from_expressions(1, 1, {"x + x*v"}, {"v"}, Domain{{0.0}, {1.0}, 1.0});
  const std::vector<Vector> half{{0.5}};
  const ContinuityReport c = block_continuity_probe(h, config(kDeltas.front()), 0.0, kDeltas, half);
  double least = 1e300;
  for (const auto& g : c.gaps) least = std::min(least, g.Q);
  report(6, least >= 0.5 - 1e-6, "Q-block gap does not vanish for (x + xv, v)",
         fmt("min gap at x = 0.5 over the sweep %.6f", least));
}

void symmetry() {
  struct Row {
    const char* g;
    double k;
    bool use_lp;
    GroupKind kind;
    std::size_t order;
  };
  const std::vector<Row> rows{
      {"u^2+v^2", 2, false, GroupKind::ContinuousO2, 0},
      {"u^4+v^4", 4, false, GroupKind::FiniteDihedral, 8},
      {"u*v", 2, true, GroupKind::OneParamHyperbolic, 0},
      {"v*(u^2+v^2)", 3, false, GroupKind::FiniteDihedral, 2},
      {"u*v*(u^2+v^2)*(2*u-v)", 5, true, GroupKind::Trivial, 1},
      {"abs(u)+abs(v)", 1, false, GroupKind::FiniteDihedral, 8},
  };
  std::size_t ok = 0;
  double hyp_residual = 0.0;
  std::string misses;
  for (const Row& r : rows) {
    const HomogeneousFn g(r.g, r.k);
    SymmetryGroup G = lin_group(g);
    if (r.use_lp) {
      const auto ls = default_labelings(g);
      G = linlp_group(G, ls);
    }
    bool match = G.kind == r.kind && G.order == r.order;
    if (r.kind == GroupKind::OneParamHyperbolic) {
      // LinLP(uv) is exactly the diag(t, 1/t) family: no extra orthogonal elements.
      match = match && G.elements.size() == 1 && !G.hyperbolic_samples.empty();
      for (const auto& h : G.hyperbolic_samples) hyp_residual = std::max(hyp_residual, residual(h, g, symmetry_samples()));
      match = match && hyp_residual <= 1e-8;
    }
    if (match) ++ok;
    else misses += std::string(" ") + r.g + "->" + kind_name(G.kind) + "/" + std::to_string(G.order);
  }
  report(7, ok == rows.size(), "symmetry classifications",
         std::to_string(ok) + "/" + std::to_string(rows.size()) + " match, hyperbolic residual " +
             fmt("%.1e", hyp_residual) + misses);
}

void foliation() {
  const std::vector<std::pair<const char*, double>> fns{
      {"u^2+v^2", 2}, {"u^4+v^4", 4}, {"u*v", 2}, {"v*(u^2+v^2)", 3}, {"u*v*(u^2+v^2)*(2*u-v)", 5},
      {"abs(u)+abs(v)", 1}, {"abs(u)^0.6+abs(v)^0.6", 0.6}};
  const auto pts = circle_samples(std::vector<double>{0.5, 1.0, 1.5}, 32);
  double worst_degree = 0.0;
  for (const auto& [e, k] : fns) {
    const HomogeneousFn f(e, k);
    worst_degree = std::max({worst_degree, std::fabs(estimate_degree(f, pts, 0.5, 2.0) - k),
                             std::fabs(estimate_degree(f, pts, 0.9, 1.3) - k)});
  }
  const std::size_t circle = level_components(HomogeneousFn("u^2+v^2", 2), 1.0, {}).components;
  const std::size_t hyp = level_components(HomogeneousFn("u*v", 2), 1.0, {}).components;
  const std::size_t cub = level_components(HomogeneousFn("v*(u^2+v^2)", 3), 0.0, {}).components;

  const Domain plane{{}, {}, 1.0};
  const auto samples = circle_samples(std::vector<double>{0.02, 0.05, 0.1, 0.15, 0.2, 0.5}, 64);
  const BundleMap rot = BundleMap::from_expressions(
      0, 2, {}, {"cos(v1^2+v2^2)*v1 - sin(v1^2+v2^2)*v2", "sin(v1^2+v2^2)*v1 + cos(v1^2+v2^2)*v2"}, plane);
  const BundleMap flow = BundleMap::from_expressions(0, 2, {}, {"exp(0.3)*v1", "exp(-0.3)*v2"}, plane);
  const BundleMap nflow = BundleMap::from_expressions(0, 2, {}, {"exp(0.3 + v1*v2)*v1", "exp(-0.3 - v1*v2)*v2"}, plane);
  double inv = 0.0;
  bool pre = true;
  for (const auto& [h, f] : {std::pair{rot, "v1^2+v2^2"}, std::pair{flow, "v1*v2"}, std::pair{nflow, "v1*v2"}}) {
    const LeafInvariance r = check_homotopy_leaf_invariance(h, HomogeneousFn(f, 2), config(0.1), kTGrid, samples);
    pre = pre && r.precondition_ok;
    inv = std::max(inv, r.residual);
  }
  report(8, worst_degree <= 1e-9 && circle == 1 && hyp == 2 && cub == 2 && pre && inv <= 1e-6,
         "homogeneity degrees, leaf counts and leaf invariance",
         fmt("degree error %.1e, leaves %.0f/", worst_degree, double(circle)) + std::to_string(hyp) + "/" +
             std::to_string(cub) + fmt(", invariance residual %.1e", inv));
}

void delta_search() {
  DeltaSearchOptions opt;
  std::string found;
  bool ok = true;
  for (const auto& m : corpus()) {
    const double eps = std::min(0.4, 0.5 * m.h.domain().tube_radius());
    const DeltaSearchResult r = admissible_delta(m.h, CertificateKind::embedding(), eps, opt);
    const bool pass = r.delta && *r.delta > 0.0 && !r.trials.empty() && r.trials.back().pass();
    ok = ok && pass;
    found += " " + m.name + "=" + (r.delta ? fmt("%g", *r.delta) : std::string("none"));
  }
  const BundleMap planted = BundleMap::from_expressions(1, 1, {"x"}, {"0*v"}, Domain{{0.0}, {1.0}, 1.0});
  const DeltaSearchResult z = admissible_delta(planted, CertificateKind::rank(0, 1), 0.4, opt);
  const bool certified = !z.delta && !z.map_qualifies;
  report(9, ok && certified, "delta search", "delta" + found + (certified ? ", planted map rejected" : ", planted map accepted"));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void determinism() {
  const fs::path root = fs::temp_directory_path() / ("fiberlin_acceptance_" + std::to_string(::getpid()));
  const fs::path a = root / "a", b = root / "b";
  const std::string base = std::string("bash ") + FIBERLIN_SOURCE_DIR "/tools/run_scenarios.sh " FIBERLIN_CLI " " +
                           FIBERLIN_SOURCE_DIR "/scenarios ";
  const int ra = std::system((base + a.string() + " > /dev/null").c_str());
  const int rb = std::system((base + b.string() + " --threads 1 > /dev/null").c_str());
  std::size_t files = 0, same = 0;
  std::string diff;
  if (ra == 0 && rb == 0 && fs::exists(a))
    for (const auto& e : fs::directory_iterator(a)) {
      ++files;
      const fs::path other = b / e.path().filename();
      if (fs::exists(other) && slurp(e.path()) == slurp(other)) ++same;
      else diff += " " + e.path().filename().string();
    }
  fs::remove_all(root);
  report(10, files > 0 && same == files, "byte-identical CLI outputs across runs and thread counts",
         std::to_string(same) + "/" + std::to_string(files) + " files identical" + diff);
}

}  // namespace

int main() {
  endpoints();
  support();
  hadamard();
  block_law();
  estimates();
  discontinuity();
  symmetry();
  foliation();
  delta_search();
  determinism();
  std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
