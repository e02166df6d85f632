#include "fiberlin/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "fiberlin/contour.hpp"
#include "fiberlin/estimates.hpp"
#include "fiberlin/foliation.hpp"
#include "fiberlin/hadamard.hpp"
#include "fiberlin/linearize.hpp"
#include "fiberlin/symmetry.hpp"

namespace fiberlin {

namespace {

// Object reader that remembers which keys were consumed so leftovers can be rejected.
class Obj {
public:
  Obj(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + ": expected an object");
  }
  const json& req(const std::string& key) {
    seen_.insert(key);
    if (!j_.contains(key)) throw ConfigError(where_ + ": missing field '" + key + "'");
    return j_.at(key);
  }
  const json* opt(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown field '" + it.key() + "'");
  }
  std::string at(const std::string& key) const { return where_ + "." + key; }

private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

double num(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + ": expected a number");
  return j.get<double>();
}

double positive(const json& j, const std::string& where) {
  const double v = num(j, where);
  if (!(v > 0.0)) throw ConfigError(where + ": must be positive");
  return v;
}

std::size_t count(const json& j, const std::string& where, std::size_t lo, std::size_t hi = 1u << 20) {
  if (!j.is_number_integer()) throw ConfigError(where + ": expected an integer");
  const auto v = j.get<long long>();
  if (v < static_cast<long long>(lo) || v > static_cast<long long>(hi))
    throw ConfigError(where + ": must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<std::size_t>(v);
}

std::string str(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": expected a string");
  return j.get<std::string>();
}

Vector nums(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of numbers");
  Vector out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(num(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::string> strs(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(str(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

bool boolean(const json& j, const std::string& where) {
  if (!j.is_boolean()) throw ConfigError(where + ": expected true or false");
  return j.get<bool>();
}

Vector t_grid_of(const json* j, const std::string& where) {
  if (!j) return {0.0, 0.25, 0.5, 0.75, 1.0};
  Vector t = nums(*j, where);
  if (std::any_of(t.begin(), t.end(), [](double v) { return v < 0.0 || v > 1.0; }))
    throw ConfigError(where + ": values must lie in [0, 1]");
  if (std::find(t.begin(), t.end(), 0.0) == t.end() || std::find(t.begin(), t.end(), 1.0) == t.end())
    throw ConfigError(where + ": must contain 0 and 1");
  return t;
}

Domain parse_domain(const json& j, const std::string& where) {
  Obj o(j, where);
  Domain d;
  d.base_lo = nums(o.req("base_lo"), o.at("base_lo"));
  d.base_hi = nums(o.req("base_hi"), o.at("base_hi"));
  d.fiber_radius = positive(o.req("fiber_radius"), o.at("fiber_radius"));
  if (const json* s = o.opt("fiber_shape")) {
    const std::string shape = str(*s, o.at("fiber_shape"));
    if (shape == "ball") d.fiber_shape = FiberShape::Ball;
    else if (shape == "box") d.fiber_shape = FiberShape::Box;
    else throw ConfigError(o.at("fiber_shape") + ": expected \"ball\" or \"box\"");
  }
  o.done();
  if (d.base_lo.size() != d.base_hi.size()) throw ConfigError(where + ": base_lo and base_hi differ in length");
  for (std::size_t i = 0; i < d.base_lo.size(); ++i)
    if (d.base_lo[i] > d.base_hi[i]) throw ConfigError(where + ": base_lo exceeds base_hi");
  return d;
}

BundleMap parse_map(const json& map_json, const json& domain_json) {
  Obj o(map_json, "map");
  auto base_vars = strs(o.req("base_vars"), o.at("base_vars"));
  auto fiber_vars = strs(o.req("fiber_vars"), o.at("fiber_vars"));
  auto a = strs(o.req("a"), o.at("a"));
  auto b = strs(o.req("b"), o.at("b"));
  o.done();
  const Domain d = parse_domain(domain_json, "domain");
  if (d.base_lo.size() != base_vars.size()) throw ConfigError("domain: base box does not match base_vars");
  const std::size_t mb = base_vars.size(), mf = fiber_vars.size();
  return BundleMap::from_expressions(mb, mf, a, b, d, std::move(base_vars), std::move(fiber_vars));
}

Window2 parse_window(const json* j, const std::string& where) {
  if (!j) return {};
  const Vector w = nums(*j, where);
  if (w.size() != 4 || !(w[1] > w[0]) || !(w[3] > w[2]))
    throw ConfigError(where + ": expected [u_lo, u_hi, v_lo, v_hi] with lo < hi");
  return {w[0], w[1], w[2], w[3]};
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (double c : v) a.push_back(c);
  return a;
}

double clean(double x) { return std::fabs(x) < 1e-15 ? 0.0 : x; }

double distance(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

json header(const std::string& command, const std::string& text) {
  return {{"tool", "fiberlin"}, {"version", kToolVersion}, {"command", command}, {"scenario_hash", fnv1a_hex(text)}};
}

json property(const std::string& name, double value, double tol, std::size_t points) {
  return {{"name", name}, {"max_residual", value}, {"tolerance", tol}, {"points", points}, {"pass", value <= tol}};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// ---------------------------------------------------------------- linearize

CommandOutput cmd_linearize(const json& root, const std::string& text) {
  Obj o(root, "scenario");
  BundleMap h = parse_map(o.req("map"), o.req("domain"));
  if (const json* c = o.opt("codomain")) h = h.with_codomain(parse_domain(*c, "codomain"));

  CertificateKind kind = CertificateKind::embedding();
  const json& kj = o.req("kind");
  if (kj.is_string()) {
    if (kj.get<std::string>() != "embedding") throw ConfigError("kind: expected \"embedding\" or {\"rank\": [p, s]}");
  } else {
    Obj k(kj, "kind");
    const json& r = k.req("rank");
    if (!r.is_array() || r.size() != 2) throw ConfigError("kind.rank: expected [p_rank, s_rank]");
    kind = CertificateKind::rank(count(r[0], "kind.rank[0]", 0, 64), count(r[1], "kind.rank[1]", 0, 64));
    k.done();
  }
  const double eps = positive(o.req("epsilon"), "epsilon");

  DeltaSearchOptions opt;
  std::size_t samples = 1000;
  if (const json* g = o.opt("grids")) {
    Obj go(*g, "grids");
    if (const json* v = go.opt("base_points")) opt.base_points = count(*v, go.at("base_points"), 1, 64);
    if (const json* v = go.opt("fiber_points")) opt.fiber_points = count(*v, go.at("fiber_points"), 2, 256);
    if (const json* v = go.opt("quad_nodes")) opt.cfg.quad_nodes = count(*v, go.at("quad_nodes"), 1, 128);
    if (const json* v = go.opt("samples")) samples = count(*v, go.at("samples"), 1, 200000);
    opt.cfg.t_grid = t_grid_of(go.opt("t_grid"), go.at("t_grid"));
    if (const json* v = go.opt("max_halvings")) opt.max_halvings = static_cast<int>(count(*v, go.at("max_halvings"), 0, 60));
    go.done();
  }
  double tol_endpoint = 1e-12, tol_lin = 1e-8, tol_zero = 1e-10;
  if (const json* t = o.opt("tolerances")) {
    Obj to(*t, "tolerances");
    if (const json* v = to.opt("injectivity_ratio")) opt.injectivity_ratio = positive(*v, to.at("injectivity_ratio"));
    if (const json* v = to.opt("support")) opt.support_tol = positive(*v, to.at("support"));
    if (const json* v = to.opt("endpoint")) tol_endpoint = positive(*v, to.at("endpoint"));
    if (const json* v = to.opt("linearization")) tol_lin = positive(*v, to.at("linearization"));
    if (const json* v = to.opt("zero_section")) tol_zero = positive(*v, to.at("zero_section"));
    to.done();
  }
  std::vector<Vector> probes;
  if (const json* p = o.opt("probes")) {
    if (!p->is_array()) throw ConfigError("probes: expected an array of points");
    for (std::size_t i = 0; i < p->size(); ++i) {
      Vector q = nums((*p)[i], "probes[" + std::to_string(i) + "]");
      if (q.size() != h.source().total_dim()) throw ConfigError("probes: point dimension does not match the map");
      if (!h.domain().contains(BundlePoint::split(q, h.source().base_dim)))
        throw ConfigError("probes: point outside the domain");
      probes.push_back(std::move(q));
    }
  }
  o.done();
  if (!(eps < h.domain().tube_radius())) throw ConfigError("epsilon must be smaller than the domain's fiber radius");

  CommandOutput out;
  out.report = header("linearize", text);
  out.report["kind"] = kind.label();
  out.report["epsilon"] = eps;
  out.report["grids"] = {{"base_points", opt.base_points}, {"fiber_points", opt.fiber_points},
                         {"quad_nodes", opt.cfg.quad_nodes}, {"t_grid", vec_json(opt.cfg.t_grid)},
                         {"samples", samples}, {"max_halvings", opt.max_halvings}};
  out.report["tolerances"] = {{"injectivity_ratio", opt.injectivity_ratio}, {"support", opt.support_tol},
                              {"endpoint", tol_endpoint}, {"linearization", tol_lin}, {"zero_section", tol_zero},
                              {"rank_threshold", "1e-8 * (1 + |block|_inf)"}};

  const DeltaSearchResult res = admissible_delta(h, kind, eps, opt);
  json trials = json::array();
  for (const auto& t : res.trials)
    trials.push_back({{"delta", t.delta}, {"image_ok", t.image_ok}, {"rank_ok", t.rank_ok},
                      {"injective_ok", t.injective_ok}, {"support_ok", t.support_ok},
                      {"support_residual", t.support_residual},
                      {"min_injectivity_ratio", std::isfinite(t.min_injectivity_ratio) ? json(t.min_injectivity_ratio) : json(nullptr)},
                      {"min_sigma_p", t.rank.min_sigma_p}, {"min_sigma_s", t.rank.min_sigma_s},
                      {"worst_t", t.rank.worst_t}, {"note", t.note}});
  out.report["delta_search"] = {{"found", res.delta.has_value()}, {"map_qualifies", res.map_qualifies},
                                {"failure_reason", res.failure_reason}, {"trials", trials}};
  if (!res.delta) {
    out.report["delta"] = nullptr;
    out.report["pass"] = false;
    out.exit_code = kExitCertifiedFailure;
    out.table.push_back("delta search failed: " + res.failure_reason);
    return out;
  }

  const double delta = *res.delta;
  out.report["delta"] = delta;
  const HomotopyConfig cfg = opt.cfg.with_delta(delta);
  const std::size_t mb = h.source().base_dim, mf = h.source().fiber_dim;
  const double radius = h.domain().fiber_radius;
  const double a = cfg.bump.a(), b = cfg.bump.b();
  const BundleMap tangent = fiber_tangent(h);

  auto max_over = [&](const std::vector<Vector>& pts, std::span<const double> ts, auto&& residual) {
    const std::size_t n = pts.size();
    const auto r = parallel_map<double>(ts.size() * n, [&](std::size_t k) {
      return residual(ts[k / n], BundlePoint::split(pts[k % n], mb));
    });
    double worst = 0.0;
    for (double v : r) worst = std::max(worst, v);
    return worst;
  };
  const Vector one{1.0}, zero{0.0};
  json props = json::array();
  const auto all = shell_samples(h.domain(), mf, 0.0, radius, samples, opt.base_points);
  props.push_back(property("endpoint_identity", max_over(all, one, [&](double t, const BundlePoint& p) {
    return distance(linhom(h, cfg, t, p).coords(), h(p.coords()));
  }), tol_endpoint, all.size()));
  const auto inner = shell_samples(h.domain(), mf, 0.0, a * delta, samples, opt.base_points);
  props.push_back(property("linearization_identity", max_over(inner, zero, [&](double t, const BundlePoint& p) {
    return distance(linhom(h, cfg, t, p).coords(), tangent(p.coords()));
  }), tol_lin, inner.size()));
  const auto outer = b * delta <= radius ? shell_samples(h.domain(), mf, b * delta, radius, samples, opt.base_points)
                                         : std::vector<Vector>{};
  props.push_back(property("support", max_over(outer, cfg.t_grid, [&](double t, const BundlePoint& p) {
    return distance(linhom(h, cfg, t, p).coords(), h(p.coords()));
  }), opt.support_tol, outer.size() * cfg.t_grid.size()));
  std::vector<Vector> zs;
  for (auto x : base_grid(h.domain(), opt.base_points)) {
    x.resize(mb + mf, 0.0);
    zs.push_back(std::move(x));
  }
  props.push_back(property("zero_section_restriction", max_over(zs, cfg.t_grid, [&](double t, const BundlePoint& p) {
    return distance(linhom(h, cfg, t, p).coords(), h(p.coords()));
  }), tol_zero, zs.size() * cfg.t_grid.size()));

  bool pass = true;
  for (const auto& p : props) {
    pass = pass && p["pass"].get<bool>();
    out.table.push_back(p["name"].get<std::string>() + "  " + fmt(p["max_residual"].get<double>()) + "  <= " +
                        fmt(p["tolerance"].get<double>()) + "  " + (p["pass"].get<bool>() ? "PASS" : "FAIL"));
  }
  out.report["properties"] = props;

  json traj = json::array();
  for (const auto& p : probes) {
    json rows = json::array();
    for (double t : cfg.t_grid)
      rows.push_back({{"t", t}, {"image", vec_json(linhom(h, cfg, t, BundlePoint::split(p, mb)).coords())}});
    traj.push_back({{"point", vec_json(p)}, {"samples", rows}});
  }
  out.report["trajectories"] = traj;
  out.report["pass"] = pass;
  out.exit_code = pass ? kExitPass : kExitCertifiedFailure;
  out.table.insert(out.table.begin(), "delta = " + fmt(delta) + " (" + kind.label() + ")");
  return out;
}

// --------------------------------------------------------- verify-estimates

CommandOutput cmd_verify_estimates(const json& root, const std::string& text) {
  Obj o(root, "scenario");
  const BundleMap h = parse_map(o.req("map"), o.req("domain"));
  Vector deltas{0.2, 0.1, 0.05};
  if (const json* d = o.opt("deltas")) {
    deltas = nums(*d, "deltas");
    if (deltas.empty() || std::any_of(deltas.begin(), deltas.end(), [](double v) { return !(v > 0.0); }))
      throw ConfigError("deltas: expected positive values");
  }
  const Vector ts = t_grid_of(o.opt("t_grid"), "t_grid");
  std::size_t base_points = 5, fiber_points = 11;
  if (const json* g = o.opt("grids")) {
    Obj go(*g, "grids");
    if (const json* v = go.opt("base_points")) base_points = count(*v, go.at("base_points"), 1, 64);
    if (const json* v = go.opt("fiber_points")) fiber_points = count(*v, go.at("fiber_points"), 2, 256);
    go.done();
  }
  struct Extra {
    std::string component;
    int order;
    bool fiber_only;
  };
  std::vector<Extra> extras;
  if (const json* e = o.opt("extra_seminorms")) {
    if (!e->is_array()) throw ConfigError("extra_seminorms: expected an array");
    for (std::size_t i = 0; i < e->size(); ++i) {
      const std::string where = "extra_seminorms[" + std::to_string(i) + "]";
      Obj eo((*e)[i], where);
      Extra x;
      x.component = str(eo.req("component"), eo.at("component"));
      if (x.component != "a" && x.component != "b") throw ConfigError(eo.at("component") + ": expected \"a\" or \"b\"");
      x.order = static_cast<int>(count(eo.req("order"), eo.at("order"), 0, 3));
      x.fiber_only = true;
      if (const json* ax = eo.opt("axes")) {
        const std::string s = str(*ax, eo.at("axes"));
        if (s != "fiber" && s != "all") throw ConfigError(eo.at("axes") + ": expected \"fiber\" or \"all\"");
        x.fiber_only = s == "fiber";
      }
      eo.done();
      extras.push_back(x);
    }
  }
  bool probe = false;
  double probe_t = 0.5;
  Vector probe_deltas;
  std::size_t probe_base = 5;
  if (const json* c = o.opt("continuity")) {
    Obj co(*c, "continuity");
    probe = true;
    if (const json* v = co.opt("t")) {
      probe_t = num(*v, co.at("t"));
      if (probe_t < 0.0 || probe_t > 1.0) throw ConfigError("continuity.t: must lie in [0, 1]");
    }
    probe_deltas = co.opt("deltas") ? nums(*co.opt("deltas"), co.at("deltas")) : deltas;
    if (probe_deltas.size() < 2) throw ConfigError("continuity.deltas: need at least two values");
    if (const json* v = co.opt("base_points")) probe_base = count(*v, co.at("base_points"), 1, 64);
    co.done();
  }
  o.done();

  CommandOutput out;
  out.report = header("verify-estimates", text);
  out.report["grids"] = {{"base_points", base_points}, {"fiber_points", fiber_points}, {"deltas", vec_json(deltas)},
                         {"t_grid", vec_json(ts)}, {"tube_refinement", "2 * fiber_points + 1 points across 2.5 delta"}};
  out.report["tolerances"] = {{"relative_slack", kEstimateSlack}, {"third_order_allowance", kThirdOrderAllowance},
                              {"roundoff_floor", kRoundoffFloor}};
  const HomotopyConfig base_cfg;
  out.report["mu_sup_derivative"] = base_cfg.bump.sup_derivative();

  bool pass = true;
  std::size_t checked = 0, passed = 0;
  json rows = json::array();
  json seminorms = json::array();
  out.table.push_back("ineq    delta      t      lhs         rhs         margin      result");
  for (double d : deltas) {
    const auto K = estimate_samples(h.domain(), h.source().fiber_dim, d, base_points, fiber_points);
    const EstimateBounds bounds = EstimateBounds::compute(h, K, base_cfg.bump);
    json sj = {{"delta", d}, {"points", K.size()}, {"a_1_fiber", bounds.a1m}, {"a_2_all", bounds.a2},
               {"b_2_fiber", bounds.b2m}, {"b_3_fiber", bounds.b3m}, {"b_3_all", bounds.b3}};
    json extra = json::array();
    for (const auto& x : extras) {
      const std::size_t mb = h.source().base_dim, nb = h.target().base_dim;
      VectorField comp = [h, nb, x](std::span<const double> c) {
        Vector img = h(c);
        if (x.component == "a") img.resize(nb);
        else img.erase(img.begin(), img.begin() + static_cast<std::ptrdiff_t>(nb));
        return img;
      };
      const double value = (x.component == "a" && nb == 0)
                               ? 0.0
                               : seminorm(comp, x.order, K, h.source().total_dim(), mb, x.fiber_only);
      extra.push_back({{"component", x.component}, {"order", x.order}, {"axes", x.fiber_only ? "fiber" : "all"},
                       {"value", value}});
    }
    sj["extra"] = extra;
    seminorms.push_back(sj);
    for (double t : ts) {
      const EstimateReport rep = verify_estimates(h, base_cfg.with_delta(d), t, K, &bounds);
      for (const auto& r : rep.records) {
        ++checked;
        if (r.pass) ++passed;
        pass = pass && r.pass;
        rows.push_back({{"name", r.name}, {"delta", d}, {"t", t}, {"lhs", r.lhs}, {"rhs", r.rhs},
                        {"allowance", r.allowance}, {"margin", r.rhs - r.lhs}, {"pass", r.pass},
                        {"worst_point", vec_json(r.worst_point)}});
        char line[160];
        std::snprintf(line, sizeof line, "%-6s  %-9.4g  %-5.3g  %-10.4e  %-10.4e  %-10.3e  %s", r.name.c_str(), d, t,
                      r.lhs, r.rhs, r.rhs - r.lhs, r.pass ? "PASS" : "FAIL");
        out.table.push_back(line);
      }
    }
  }
  out.report["seminorms"] = seminorms;
  out.report["inequalities"] = rows;
  out.report["summary"] = {{"checked", checked}, {"passed", passed}};

  if (probe) {
    std::sort(probe_deltas.begin(), probe_deltas.end(), std::greater<>());
    const auto bases = base_grid(h.domain(), probe_base);
    const ContinuityReport cr = block_continuity_probe(h, base_cfg, probe_t, probe_deltas, bases);
    json gaps = json::array();
    for (const auto& g : cr.gaps) gaps.push_back({{"delta", g.delta}, {"P", g.P}, {"Q_t0", g.Q}, {"R", g.R}, {"S", g.S}});
    const auto& first = cr.gaps.front();
    const auto& last = cr.gaps.back();
    const double ratio = first.delta / last.delta;
    const double need = 3.5 * ratio / 4.0;
    const bool p_ok = shrinks_linearly(first.P, last.P, need);
    const bool s_ok = shrinks_linearly(first.S, last.S, need);
    out.report["continuity"] = {{"t", probe_t}, {"gaps", gaps}, {"required_ratio", need},
                                {"P_shrinks", p_ok}, {"S_shrinks", s_ok}};
    pass = pass && p_ok && s_ok;
    out.table.push_back("continuity: P " + std::string(p_ok ? "shrinks" : "does not shrink") + ", S " +
                        (s_ok ? "shrinks" : "does not shrink"));
  }
  out.report["pass"] = pass;
  out.exit_code = pass ? kExitPass : kExitCertifiedFailure;
  return out;
}

// ----------------------------------------------------------------- symmetry

json matrix_json(const Eigen::Matrix2d& m) {
  return json::array({json::array({clean(m(0, 0)), clean(m(0, 1))}), json::array({clean(m(1, 0)), clean(m(1, 1))})});
}

json group_json(const SymmetryGroup& g, const HomogeneousFn& f) {
  const auto samples = symmetry_samples();
  json elems = json::array();
  for (const auto& e : g.elements)
    elems.push_back({{"tag", e.label()}, {"param", clean(e.param)}, {"matrix", matrix_json(e.m)},
                     {"residual", residual(e, f, samples)}});
  json hyp = json::array();
  for (const auto& e : g.hyperbolic_samples)
    hyp.push_back({{"t", e.param}, {"matrix", matrix_json(e.m)}, {"residual", residual(e, f, samples)}});
  return {{"kind", kind_name(g.kind)}, {"order", g.order}, {"rotations", g.rotations}, {"reflections", g.reflections},
          {"continuous_rotations", g.continuous_rotations}, {"continuous_reflections", g.continuous_reflections},
          {"hyperbolic", g.hyperbolic}, {"residual", g.residual}, {"closure_ok", g.closure_ok},
          {"ambiguous", g.ambiguous}, {"elements", elems}, {"hyperbolic_samples", hyp}};
}

std::string group_text(const SymmetryGroup& g) {
  std::string s = kind_name(g.kind);
  if (g.order > 0) s += " (order " + std::to_string(g.order) + ")";
  if (g.hyperbolic && g.kind != GroupKind::OneParamHyperbolic) s += " + diag(t, 1/t)";
  return s;
}

std::vector<LeafLabeling> labelings_for(const HomogeneousFn& g, const Vector& levels, const Window2& w,
                                        const LabelingOptions& lo) {
  if (levels.empty()) return default_labelings(g, w, lo);
  std::vector<LeafLabeling> out;
  for (double c : levels) out.push_back(level_components(g, c, w, lo));
  return out;
}

CommandOutput cmd_symmetry(const json& root, const std::string& text) {
  Obj o(root, "scenario");
  const std::string expr = str(o.req("g"), "g");
  const double k = positive(o.req("k"), "k");
  const Window2 window = parse_window(o.opt("window"), "window");
  LabelingOptions lo;
  if (const json* v = o.opt("resolution")) lo.resolution = count(*v, "resolution", 8, 2048);
  Vector levels;
  if (const json* v = o.opt("levels")) levels = nums(*v, "levels");
  SymmetryOptions so;
  if (const json* v = o.opt("tol")) so.tol = positive(*v, "tol");
  if (const json* v = o.opt("angles")) so.angles = count(*v, "angles", 8, 1u << 18);
  if (const json* v = o.opt("hyperbolic_t")) {
    so.hyperbolic_t = nums(*v, "hyperbolic_t");
    for (double t : so.hyperbolic_t)
      if (!(t > 0.0)) throw ConfigError("hyperbolic_t: values must be positive");
  }
  std::string figure;
  if (const json* v = o.opt("figure")) figure = str(*v, "figure");
  json expect;
  if (const json* v = o.opt("expect")) {
    Obj eo(*v, "expect");
    for (const char* key : {"lin_kind", "linlp_kind"})
      if (const json* s = eo.opt(key)) expect[key] = str(*s, eo.at(key));
    for (const char* key : {"lin_order", "linlp_order"})
      if (const json* s = eo.opt(key)) expect[key] = count(*s, eo.at(key), 0, 1u << 20);
    eo.done();
  }
  o.done();

  const HomogeneousFn g(expr, k);
  if (g.dim() != 2) throw ConfigError("g: symmetry search needs the variables u, v");
  const SymmetryGroup lin = lin_group(g, so);
  const auto labs = labelings_for(g, levels, window, lo);
  const SymmetryGroup lp = linlp_group(lin, labs);

  CommandOutput out;
  out.report = header("symmetry", text);
  out.report["g"] = expr;
  out.report["k"] = k;
  out.report["grids"] = {{"angles", so.angles}, {"refine_width", so.refine_width}, {"resolution", lo.resolution},
                         {"window", {window.u_lo, window.u_hi, window.v_lo, window.v_hi}},
                         {"hyperbolic_t", vec_json(so.hyperbolic_t)}, {"probe_points", symmetry_samples().size()}};
  out.report["tolerances"] = {{"residual", so.tol}, {"closure", 1e-6}};
  json lv = json::array();
  for (const auto& l : labs) lv.push_back({{"level", l.level}, {"components", l.components}});
  out.report["levels"] = lv;
  out.report["lin"] = group_json(lin, g);
  out.report["linlp"] = group_json(lp, g);

  bool pass = lin.closure_ok && lp.closure_ok;
  json mismatches = json::array();
  auto check = [&](const char* key, const json& got) {
    if (expect.contains(key) && expect[key] != got) mismatches.push_back({{"field", key}, {"expected", expect[key]}, {"got", got}});
  };
  check("lin_kind", kind_name(lin.kind));
  check("lin_order", lin.order);
  check("linlp_kind", kind_name(lp.kind));
  check("linlp_order", lp.order);
  if (!expect.is_null()) out.report["expect"] = {{"expected", expect}, {"mismatches", mismatches}};
  pass = pass && mismatches.empty();
  out.report["pass"] = pass;
  out.exit_code = pass ? kExitPass : kExitCertifiedFailure;
  out.table.push_back("Lin(g)   : " + group_text(lin));
  out.table.push_back("LinLP(g) : " + group_text(lp));

  if (!figure.empty()) {
    std::vector<LevelContours> contours;
    const PlaneFn f = [&g](double u, double v) { return g(Vector{u, v}); };
    for (const auto& l : labs) contours.push_back({l.level, marching_squares(f, l.level, window, 200)});
    SvgStyle style;
    style.title = expr;
    style.notes = {"Lin: " + group_text(lin), "LinLP: " + group_text(lp)};
    out.svg = render_svg(contours, window, style);
    out.svg_name = figure;
  }
  return out;
}

// --------------------------------------------------------------------- plot

CommandOutput cmd_plot(const json& root, const std::string&) {
  Obj o(root, "scenario");
  const std::string expr = str(o.req("g"), "g");
  if (const json* v = o.opt("k")) positive(*v, "k");
  const Vector levels = nums(o.req("levels"), "levels");
  if (levels.empty()) throw ConfigError("levels: need at least one level");
  const Window2 window = parse_window(o.opt("window"), "window");
  std::size_t resolution = 200;
  if (const json* v = o.opt("resolution")) resolution = count(*v, "resolution", 2, 4096);
  SvgStyle style;
  if (const json* v = o.opt("width")) style.width = static_cast<int>(count(*v, "width", 64, 8192));
  if (const json* v = o.opt("colors")) style.colors = strs(*v, "colors");
  if (const json* v = o.opt("title")) style.title = str(*v, "title");
  else style.title = expr;
  if (const json* v = o.opt("axes")) style.axes = boolean(*v, "axes");
  o.done();

  const HomogeneousFn g(expr, 1.0);
  if (g.dim() != 2) throw ConfigError("g: plots need the variables u, v");
  const PlaneFn f = [&g](double u, double v) { return g(Vector{u, v}); };
  CommandOutput out;
  std::vector<LevelContours> contours;
  for (double c : levels) {
    contours.push_back({c, marching_squares(f, c, window, resolution)});
    if (contours.back().lines.empty()) out.table.push_back("warning: level " + fmt(c) + " has no contour in the window");
  }
  out.svg = render_svg(contours, window, style);
  return out;
}

// ---------------------------------------------------------- foliation-check

CommandOutput cmd_foliation_check(const json& root, const std::string& text) {
  Obj o(root, "scenario");
  const std::string expr = str(o.req("f"), "f");
  const double k = positive(o.req("k"), "k");
  const Vector levels = nums(o.req("levels"), "levels");
  const Window2 window = parse_window(o.opt("window"), "window");
  LabelingOptions lo;
  if (const json* v = o.opt("resolution")) lo.resolution = count(*v, "resolution", 8, 2048);
  std::optional<BundleMap> h;
  const json* mj = o.opt("map");
  const json* dj = o.opt("domain");
  if ((mj == nullptr) != (dj == nullptr)) throw ConfigError("map and domain must be given together");
  if (mj) h = parse_map(*mj, *dj);
  HomotopyConfig cfg;
  if (const json* v = o.opt("delta")) cfg.delta = positive(*v, "delta");
  cfg.t_grid = t_grid_of(o.opt("t_grid"), "t_grid");
  Vector radii{0.25, 0.5, 0.75, 1.0};
  std::size_t per_circle = 64;
  if (const json* s = o.opt("samples")) {
    Obj so(*s, "samples");
    if (const json* v = so.opt("radii")) radii = nums(*v, so.at("radii"));
    if (const json* v = so.opt("count")) per_circle = count(*v, so.at("count"), 1, 100000);
    so.done();
  }
  std::vector<Eigen::Matrix2d> matrices;
  if (const json* m = o.opt("matrices")) {
    if (!m->is_array()) throw ConfigError("matrices: expected an array of 2x2 matrices");
    for (std::size_t i = 0; i < m->size(); ++i) {
      const json& mi = (*m)[i];
      const std::string where = "matrices[" + std::to_string(i) + "]";
      if (!mi.is_array() || mi.size() != 2) throw ConfigError(where + ": expected [[a, b], [c, d]]");
      const Vector r0 = nums(mi[0], where), r1 = nums(mi[1], where);
      if (r0.size() != 2 || r1.size() != 2) throw ConfigError(where + ": expected [[a, b], [c, d]]");
      Eigen::Matrix2d A;
      A << r0[0], r0[1], r1[0], r1[1];
      matrices.push_back(A);
    }
  }
  std::vector<std::size_t> expect_components;
  if (const json* e = o.opt("expect_components")) {
    if (!e->is_array() || e->size() != levels.size()) throw ConfigError("expect_components: one count per level");
    for (std::size_t i = 0; i < e->size(); ++i) expect_components.push_back(count((*e)[i], "expect_components", 0));
  }
  bool export_labels = false;
  if (const json* v = o.opt("export_labels")) export_labels = boolean(*v, "export_labels");
  o.done();

  const HomogeneousFn f(expr, k);
  CommandOutput out;
  out.report = header("foliation-check", text);
  out.report["f"] = expr;
  out.report["k"] = k;
  out.report["grids"] = {{"resolution", lo.resolution},
                         {"window", {window.u_lo, window.u_hi, window.v_lo, window.v_hi}},
                         {"sample_radii", vec_json(radii)}, {"samples_per_circle", per_circle},
                         {"t_grid", vec_json(cfg.t_grid)}, {"delta", cfg.delta}};
  out.report["tolerances"] = {{"homogeneity", 1e-9}, {"degree", 1e-9}, {"precondition", kInvariancePrecondition},
                              {"invariance", 1e-6}, {"band", "|f - c| <= |grad f| * cell"}};
  bool pass = true;

  const auto samples = f.dim() == 2 ? circle_samples(radii, per_circle) : std::vector<Vector>{};
  std::vector<Vector> probe = samples;
  if (f.dim() != 2) {
    for (double r : radii)
      for (std::size_t i = 0; i < f.dim(); ++i) {
        Vector p(f.dim(), 0.0);
        p[i] = r;
        probe.push_back(p);
        p[(i + 1) % f.dim()] = -0.5 * r;
        probe.push_back(p);
      }
  }
  const Vector taus{0.5, 2.0, 3.0};
  const double hom = check_homogeneity(f, probe, taus);
  const double kest = estimate_degree(f, probe, 0.5, 2.0);
  out.report["homogeneity"] = {{"residual", hom}, {"pass", hom <= 1e-9}};
  out.report["degree"] = {{"estimate", kest}, {"declared", k}, {"pass", std::fabs(kest - k) <= 1e-9}};
  pass = pass && hom <= 1e-9 && std::fabs(kest - k) <= 1e-9;
  out.table.push_back("homogeneity residual " + fmt(hom) + ", degree estimate " + fmt(kest));

  std::vector<LeafLabeling> labs;
  if (f.dim() == 2) {
    const LabelingOptions& opt = lo;
    json lv = json::array();
    for (std::size_t i = 0; i < levels.size(); ++i) {
      labs.push_back(level_components(f, levels[i], window, opt));
      json entry = {{"level", levels[i]}, {"components", labs.back().components}};
      if (!expect_components.empty()) {
        entry["expected"] = expect_components[i];
        entry["pass"] = expect_components[i] == labs.back().components;
        pass = pass && expect_components[i] == labs.back().components;
      }
      if (export_labels) entry["labels"] = labs.back().labels;
      lv.push_back(entry);
      out.table.push_back("level " + fmt(levels[i]) + ": " + std::to_string(labs.back().components) + " leaves");
    }
    out.report["levels"] = lv;
  }

  auto leaf_json = [](const LeafCheck& c) {
    return json{{"pass", c.pass}, {"checked", c.checked}, {"violations", c.violations}, {"escapes", c.escapes},
                {"details", c.details}};
  };
  json mats = json::array();
  for (const auto& A : matrices) {
    if (labs.empty()) throw ConfigError("matrices need a planar f");
    const PlanarLinear P = PlanarLinear::general(A);
    const LeafCheck c = check_leaf_preserving([&P](std::span<const double> p) { return P.apply(p); }, labs);
    mats.push_back({{"matrix", matrix_json(A)}, {"leaf_preserving", leaf_json(c)}});
  }
  out.report["matrices"] = mats;

  if (h) {
    if (h->source().fiber_dim != f.dim()) throw ConfigError("map fiber dimension does not match f");
    const auto ws = shell_samples(h->domain(), f.dim(), 0.0, h->domain().fiber_radius, 1000);
    const LeafInvariance inv = check_homotopy_leaf_invariance(*h, f, cfg, cfg.t_grid, ws);
    const bool ok = inv.precondition_ok && inv.residual <= 1e-6;
    json mj_out = {{"precondition_ok", inv.precondition_ok}, {"precondition_residual", inv.precondition_residual},
                   {"invariance_residual", inv.residual}, {"worst_t", inv.worst_t}, {"points", ws.size()},
                   {"pass", ok}};
    if (!inv.precondition_ok) out.table.push_back("precondition failed: f(h(w)) differs from f(w)");
    if (h->source().base_dim == 0 && !labs.empty()) {
      const BundleMap hm = *h;
      const Domain dom = hm.domain();
      const LeafCheck c = check_leaf_preserving(
          [&hm, &dom](std::span<const double> p) {
            const BundlePoint q{{}, Vector(p.begin(), p.end())};
            if (!dom.contains(q)) return Vector{INFINITY, INFINITY};
            return hm(q).v;
          },
          labs);
      mj_out["leaf_preserving"] = leaf_json(c);
      pass = pass && c.pass;
    }
    out.report["map"] = mj_out;
    pass = pass && ok;
    out.table.push_back("homotopy invariance residual " + fmt(inv.residual) + (ok ? "  PASS" : "  FAIL"));
  }
  out.report["pass"] = pass;
  out.exit_code = pass ? kExitPass : kExitCertifiedFailure;
  return out;
}

// -------------------------------------------------------------- parse-check

CommandOutput cmd_parse_check(const json& root, const std::string& text) {
  Obj o(root, "scenario");
  const auto exprs = strs(o.req("expressions"), "expressions");
  std::optional<std::vector<std::string>> vars;
  if (const json* v = o.opt("variables")) vars = strs(*v, "variables");
  Env env;
  bool evaluate = false;
  if (const json* at = o.opt("at")) {
    if (!at->is_object()) throw ConfigError("at: expected an object of variable values");
    for (auto it = at->begin(); it != at->end(); ++it) env[it.key()] = num(it.value(), "at." + it.key());
    evaluate = true;
  }
  o.done();

  CommandOutput out;
  out.report = header("parse-check", text);
  json rows = json::array();
  bool pass = true;
  for (const auto& s : exprs) {
    json row = {{"input", s}};
    try {
      const Expr e = parse(s);
      const std::string printed = print(e);
      row["printed"] = printed;
      row["round_trip"] = parse(printed) == e;
      const auto fv = free_variables(e);
      row["free_variables"] = fv;
      bool ok = row["round_trip"].get<bool>();
      if (vars) {
        std::vector<std::string> unknown;
        for (const auto& name : fv)
          if (std::find(vars->begin(), vars->end(), name) == vars->end()) unknown.push_back(name);
        row["unknown_variables"] = unknown;
        ok = ok && unknown.empty();
      }
      if (evaluate) {
        try {
          row["value"] = eval(e, env);
        } catch (const std::exception& err) {
          row["eval_error"] = err.what();
          ok = false;
        }
      }
      row["ok"] = ok;
      pass = pass && ok;
    } catch (const ParseError& err) {
      row["ok"] = false;
      row["error"] = err.what();
      row["offset"] = err.offset();
      pass = false;
    }
    out.table.push_back((row["ok"].get<bool>() ? "ok    " : "error ") + s);
    rows.push_back(row);
  }
  out.report["expressions"] = rows;
  out.report["pass"] = pass;
  out.exit_code = pass ? kExitPass : kExitCertifiedFailure;
  return out;
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::string> command_names() {
  return {"linearize", "verify-estimates", "symmetry", "plot", "foliation-check", "parse-check"};
}

CommandOutput run_command(const std::string& command, const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (command == "linearize") return cmd_linearize(root, text);
  if (command == "verify-estimates") return cmd_verify_estimates(root, text);
  if (command == "symmetry") return cmd_symmetry(root, text);
  if (command == "plot") return cmd_plot(root, text);
  if (command == "foliation-check") return cmd_foliation_check(root, text);
  if (command == "parse-check") return cmd_parse_check(root, text);
  throw ConfigError("unknown command '" + command + "'");
}

}  // namespace fiberlin
