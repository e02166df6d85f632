#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "fiberlin/symmetry.hpp"

using namespace fiberlin;

namespace {

constexpr double kPi = std::numbers::pi;

SymmetryGroup linlp(const HomogeneousFn& g) {
  const SymmetryGroup lin = lin_group(g);
  const auto ls = default_labelings(g);
  return linlp_group(lin, ls);
}

bool contains(const SymmetryGroup& G, const Eigen::Matrix2d& m) {
  for (const auto& e : G.elements)
    if ((e.m - m).cwiseAbs().maxCoeff() <= 1e-6) return true;
  return false;
}

}  // namespace

TEST_CASE("residual") {
  const auto s = symmetry_samples();
  CHECK(residual(PlanarLinear::rotation(0.0), HomogeneousFn("u^3+u*v", 3.0), s) == 0.0);
  CHECK(residual(PlanarLinear::rotation(kPi / 2), HomogeneousFn("u^2+v^2", 2.0), s) <= 1e-14);
  const std::vector<Vector> e1{{1.0, 0.0}};
  CHECK(residual(PlanarLinear::rotation(kPi / 4), HomogeneousFn("u^4+v^4", 4.0), e1) ==
        doctest::Approx(0.25).epsilon(1e-12));
  // Rotation by pi/4 does not fix |u| + |v|; rotation by pi/2 does.
  CHECK(residual(PlanarLinear::rotation(kPi / 4), HomogeneousFn("abs(u)+abs(v)", 1.0), e1) > 0.1);
  CHECK(residual(PlanarLinear::rotation(kPi / 2), HomogeneousFn("abs(u)+abs(v)", 1.0), s) <= 1e-14);
}

TEST_CASE("planar linear constructors") {
  const PlanarLinear r = PlanarLinear::reflection(kPi / 2);
  const Vector p{1.0, 0.0};
  const Vector q = r.apply(p);
  CHECK(std::fabs(q[0]) <= 1e-15);
  CHECK(q[1] == doctest::Approx(1.0));
  CHECK(PlanarLinear::hyperbolic(2.0).apply(Vector{1.0, 1.0}) == Vector{2.0, 0.5});
  CHECK((PlanarLinear::rotation(0.3).m * PlanarLinear::rotation(0.3).m.transpose() - Eigen::Matrix2d::Identity())
            .cwiseAbs()
            .maxCoeff() <= 1e-15);
}

TEST_CASE("orthogonal symmetries") {
  CHECK(find_O2_symmetries(HomogeneousFn("u^2+v^2", 2.0)).kind == GroupKind::ContinuousO2);
  const SymmetryGroup q = find_O2_symmetries(HomogeneousFn("u^4+v^4", 4.0));
  CHECK(q.kind == GroupKind::FiniteDihedral);
  CHECK(q.order == 8);
  CHECK(q.rotations == 4);
  CHECK(q.reflections == 4);
  CHECK(group_closure_check(q.elements));
  const SymmetryGroup d = find_O2_symmetries(HomogeneousFn("abs(u)+abs(v)", 1.0));
  CHECK(d.kind == GroupKind::FiniteDihedral);
  CHECK(d.order == 8);
  CHECK(find_O2_symmetries(HomogeneousFn("u^3 - 3*u*v^2", 3.0)).order == 6);
  const SymmetryGroup c = find_O2_symmetries(HomogeneousFn("u^3 - 3*u*v^2 + v^3 - 3*u^2*v", 3.0));
  CHECK(c.rotations == 3);
}

TEST_CASE("hyperbolic detection") {
  CHECK(detect_hyperbolic(HomogeneousFn("u*v", 2.0)).detected);
  const HyperbolicReport c = detect_hyperbolic(HomogeneousFn("u^2+v^2", 2.0));
  CHECK_FALSE(c.detected);
  CHECK_FALSE(detect_hyperbolic(HomogeneousFn("u^4+v^4", 4.0)).detected);
  // Oracle at t = 2, p = (1, 0): |4 - 1| / (1 + 1).
  const std::vector<Vector> e1{{1.0, 0.0}};
  CHECK(residual(PlanarLinear::hyperbolic(2.0), HomogeneousFn("u^2+v^2", 2.0), e1) == doctest::Approx(1.5));
}

TEST_CASE("Lin and LinLP") {
  const SymmetryGroup uv = lin_group(HomogeneousFn("u*v", 2.0));
  CHECK(uv.kind == GroupKind::OneParamHyperbolic);
  CHECK(uv.hyperbolic);
  Eigen::Matrix2d swap, anti;
  swap << 0, 1, 1, 0;
  anti << 0, -1, -1, 0;
  CHECK(contains(uv, swap));
  CHECK(contains(uv, anti));
  CHECK(contains(uv, -Eigen::Matrix2d::Identity()));
  for (const auto& h : uv.hyperbolic_samples) CHECK(residual(h, HomogeneousFn("u*v", 2.0), symmetry_samples()) <= 1e-8);

  const SymmetryGroup uvlp = linlp(HomogeneousFn("u*v", 2.0));
  CHECK(uvlp.kind == GroupKind::OneParamHyperbolic);
  CHECK(uvlp.elements.size() == 1);
  CHECK_FALSE(contains(uvlp, -Eigen::Matrix2d::Identity()));

  const SymmetryGroup cub = lin_group(HomogeneousFn("v*(u^2+v^2)", 3.0));
  CHECK(cub.order == 2);
  Eigen::Matrix2d flip;
  flip << -1, 0, 0, 1;
  CHECK(contains(cub, flip));

  const HomogeneousFn quint("u*v*(u^2+v^2)*(2*u-v)", 5.0);
  CHECK(lin_group(quint).kind == GroupKind::Trivial);
  CHECK(linlp(quint).kind == GroupKind::Trivial);

  CHECK(linlp(HomogeneousFn("u^2+v^2", 2.0)).kind == GroupKind::ContinuousO2);
  CHECK(linlp(HomogeneousFn("u^4+v^4", 4.0)).order == 8);
}

TEST_CASE("LinLP is a subgroup of Lin") {
  for (const auto& [e, k] : std::vector<std::pair<std::string, double>>{
           {"u^4+v^4", 4.0}, {"v*(u^2+v^2)", 3.0}, {"u*v", 2.0}, {"abs(u)+abs(v)", 1.0}, {"u^2-v^2", 2.0}}) {
    const HomogeneousFn g(e, k);
    const SymmetryGroup lin = lin_group(g);
    const SymmetryGroup lp = linlp(g);
    CHECK(lp.elements.size() <= lin.elements.size());
    for (const auto& el : lp.elements) CHECK_MESSAGE(contains(lin, el.m), e);
    CHECK(group_closure_check(lp.elements));
  }
}

TEST_CASE("classification does not depend on positive rescaling") {
  for (double lam : {0.1, 10.0}) {
    const std::string s = std::to_string(lam);
    CHECK(lin_group(HomogeneousFn(s + "*(u^4+v^4)", 4.0)).order == 8);
    CHECK(lin_group(HomogeneousFn(s + "*u*v", 2.0)).kind == GroupKind::OneParamHyperbolic);
    CHECK(lin_group(HomogeneousFn(s + "*v*(u^2+v^2)", 3.0)).order == 2);
  }
}

TEST_CASE("closure") {
  const std::vector<PlanarLinear> half{PlanarLinear::rotation(0.0), PlanarLinear::rotation(kPi)};
  CHECK(group_closure_check(half));
  const std::vector<PlanarLinear> quarter{PlanarLinear::rotation(0.0), PlanarLinear::rotation(kPi / 2)};
  CHECK_FALSE(group_closure_check(quarter));
  CHECK(kind_name(GroupKind::ContinuousO2) == "continuous_O2");
  CHECK(kind_name(GroupKind::OneParamHyperbolic) == "one_param_hyperbolic");
}
