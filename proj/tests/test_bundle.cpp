#include <doctest.h>

#include <cmath>

#include "fiberlin/bundle.hpp"
#include "fiberlin/bundle_map.hpp"

using namespace fiberlin;

TEST_CASE("scale") {
  const BundlePoint p{{0.3, -1.0}, {1.0, 2.0}};
  CHECK(scale(0.0, p) == BundlePoint{{0.3, -1.0}, {0.0, 0.0}});
  CHECK(scale(2.0, scale(3.0, p)) == scale(6.0, p));
  const BundlePoint z{{0.3}, {0.0, 0.0}};
  for (double t : {-2.0, 0.0, 0.5, 7.0}) CHECK(scale(t, z) == z);
}

TEST_CASE("norm") {
  CHECK(norm({{1.0}, {3.0, 4.0}}) == 5.0);
  CHECK(norm({{1.0}, {0.0, 0.0}}) == 0.0);
  CHECK(norm(scale(-2.0, {{1.0}, {1.0, 0.0}})) == 2.0);
}

TEST_CASE("in_tube") {
  CHECK(in_tube({{0.0}, {0.5, 0.0}}, 1.0));
  CHECK_FALSE(in_tube({{0.0}, {2.0, 0.0}}, 1.0));
  for (double e : {1e-9, 0.1, 10.0}) CHECK(in_tube({{0.0}, {0.0, 0.0}}, e));
  CHECK_THROWS_AS(in_tube({{0.0}, {0.0}}, 0.0), ConfigError);
}

TEST_CASE("coords and split") {
  const BundlePoint p{{1.0, 2.0}, {3.0}};
  CHECK(p.coords() == Vector{1.0, 2.0, 3.0});
  CHECK(BundlePoint::split(p.coords(), 2) == p);
}

TEST_CASE("domain membership") {
  Domain d{{0.0}, {1.0}, 0.5, FiberShape::Ball};
  CHECK(d.contains({{0.5}, {0.3, 0.3}}));
  CHECK_FALSE(d.contains({{0.5}, {0.4, 0.4}}));
  CHECK_FALSE(d.contains({{1.5}, {0.0, 0.0}}));
  d.fiber_shape = FiberShape::Box;
  CHECK(d.contains({{0.5}, {0.4, 0.4}}));
}

TEST_CASE("maps from expressions") {
  const Domain d{{0.0}, {1.0}, 1.0};
  const BundleMap h = BundleMap::from_expressions(1, 1, {"x + v^2"}, {"v*exp(x)"}, d);
  const BundlePoint img = h(BundlePoint{{0.5}, {0.2}});
  CHECK(img.x[0] == doctest::Approx(0.54));
  CHECK(img.v[0] == doctest::Approx(0.2 * std::exp(0.5)));
  CHECK(h.zero_section_defect() == 0.0);
  CHECK(h.expressions().size() == 2);

  CHECK_THROWS_AS(BundleMap::from_expressions(1, 1, {"x"}, {"v + 1"}, d), ConfigError);
  CHECK_THROWS_AS(BundleMap::from_expressions(1, 1, {"x"}, {"w"}, d), ConfigError);
}

TEST_CASE("default variable names") {
  CHECK(default_variable_names("x", 1) == std::vector<std::string>{"x"});
  CHECK(default_variable_names("v", 2) == std::vector<std::string>{"v1", "v2"});
}
