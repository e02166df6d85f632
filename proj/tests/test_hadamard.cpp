#include <doctest.h>

#include <cmath>

#include "fiberlin/calculus.hpp"
#include "fiberlin/hadamard.hpp"

using namespace fiberlin;

namespace {

const Domain kPoint{{}, {}, 2.0};
const Domain kUnit{{0.0}, {1.0}, 1.0};

BundleMap point_map(const char* b) { return BundleMap::from_expressions(0, 1, {}, {b}, kPoint); }

}  // namespace

TEST_CASE("fiber tangent") {
  const BundleMap cubic = point_map("v + v^3");
  const BundleMap t = fiber_tangent(cubic);
  for (double v : {-1.5, 0.2, 1.0}) CHECK(t(BundlePoint{{}, {v}}).v[0] == doctest::Approx(v).epsilon(1e-9));

  const BundleMap h = BundleMap::from_expressions(1, 1, {"x + v^2"}, {"v*exp(x)"}, kUnit);
  const BundleMap th = fiber_tangent(h);
  for (double x : {0.0, 0.4, 1.0}) {
    const BundlePoint img = th(BundlePoint{{x}, {0.7}});
    CHECK(img.x[0] == doctest::Approx(x));
    CHECK(img.v[0] == doctest::Approx(0.7 * std::exp(x)).epsilon(1e-9));
  }

  const BundleMap lin = BundleMap::from_expressions(1, 2, {"x"}, {"v1 - x*v2", "3*v2"}, kUnit);
  const BundleMap tl = fiber_tangent(lin);
  const BundlePoint p{{0.6}, {0.3, -0.4}};
  for (int i = 0; i < 2; ++i) CHECK(std::fabs(tl(p).v[i] - lin(p).v[i]) <= 1e-9);
}

TEST_CASE("fiber tangent limit") {
  const LimitResult r = fiber_tangent_limit(point_map("sin(v)"), {{}, {1.0}});
  CHECK(std::fabs(r.value[0] - 1.0) <= 1e-8);
  CHECK(r.converged);
  const LimitResult l = fiber_tangent_limit(point_map("3*v"), {{}, {0.5}});
  CHECK(std::fabs(l.value[0] - 1.5) <= 1e-12);

  const BundleMap h = BundleMap::from_expressions(1, 1, {"x + v^2"}, {"v*exp(x)"}, kUnit);
  const BundlePoint p{{0.5}, {0.8}};
  CHECK(std::fabs(fiber_tangent_limit(h, p).value[0] - fiber_tangent(h)(p).v[0]) <= 1e-6);
  const std::vector<double> short_seq{0.1, 0.05};
  CHECK_THROWS_AS(fiber_tangent_limit(h, p, short_seq), std::invalid_argument);
}

TEST_CASE("hadamard homotopy values") {
  const BundleMap s = point_map("sin(v)");
  CHECK(std::fabs(hadamard_homotopy(s, 0.5, {{}, {1.0}}).v[0] - std::sin(0.5) / 0.5) <= 1e-8);
  CHECK(std::fabs(hadamard_quadrature(s, 0.5, {{}, {1.0}}).v[0] - std::sin(0.5) / 0.5) <= 1e-8);
  CHECK(std::fabs(hadamard_homotopy(s, 0.0, {{}, {1.0}}).v[0] - 1.0) <= 1e-8);

  const BundleMap h = BundleMap::from_expressions(1, 1, {"x + v^2"}, {"v*exp(x)"}, kUnit);
  const BundlePoint p{{0.3}, {0.6}};
  CHECK(hadamard_homotopy(h, 1.0, p) == h(p));
  const BundlePoint g0 = hadamard_homotopy(h, 0.0, p);
  const BundlePoint t0 = fiber_tangent(h)(p);
  CHECK(g0.x[0] == doctest::Approx(t0.x[0]));
  CHECK(std::fabs(g0.v[0] - t0.v[0]) <= 1e-8);
  CHECK_THROWS_AS(hadamard_homotopy(h, 1.5, p), std::invalid_argument);
}

TEST_CASE("hadamard identity residuals") {
  const BundleMap sq = point_map("v^2");
  CHECK(check_hadamard_identity(sq, 0.5, {{}, {1.0}}) <= 1e-10);
  CHECK(check_hadamard_identity(sq, 0.5, {{}, {1.0}}, 32, HadamardRoute::Quadrature) <= 1e-10);
  CHECK(check_hadamard_identity(sq, 0.0, {{}, {1.0}}) == 0.0);
  const BundleMap lin = point_map("-2*v");
  for (double tau : {0.1, 0.5, 1.0}) CHECK(check_hadamard_identity(lin, tau, {{}, {0.9}}) <= 1e-12);
}

TEST_CASE("block law of the slice at the zero section") {
  const BundleMap h = BundleMap::from_expressions(1, 1, {"x + x*v + v^2"}, {"v*exp(x) + v^3"}, kUnit);
  for (double tau : {0.0, 0.5, 1.0}) {
    const BundleMap g = hadamard_slice(h, tau);
    for (double x : {0.1, 0.5, 0.9}) {
      const JacobianBlocks gb = jacobian_blocks(g, {{x}, {0.0}});
      CHECK(gb.P(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
      CHECK(std::fabs(gb.Q(0, 0) - tau * x) <= 1e-4);
      CHECK(std::fabs(gb.R(0, 0)) <= 1e-4);
      CHECK(std::fabs(gb.S(0, 0) - std::exp(x)) <= 1e-4);
    }
  }
}
