#include <doctest.h>

#include <cmath>
#include <string>

#include "fiberlin/contour.hpp"

using namespace fiberlin;

namespace {

const PlaneFn kCircle = [](double u, double v) { return u * u + v * v; };
const PlaneFn kHyp = [](double u, double v) { return u * v; };

}  // namespace

TEST_CASE("circle contours are closed and on the level set") {
  for (double r : {0.5, 1.0, 1.5}) {
    const auto lines = marching_squares(kCircle, r * r, {}, 64);
    REQUIRE(lines.size() == 1);
    CHECK(lines[0].closed);
    for (const auto& p : lines[0].points) CHECK(std::fabs(std::hypot(p[0], p[1]) - r) <= 0.02);
  }
}

TEST_CASE("hyperbola contours") {
  for (double c : {-1.0, -0.25, 0.25, 1.0}) {
    const auto lines = marching_squares(kHyp, c, {}, 64);
    CHECK(lines.size() == 2);
    for (const auto& l : lines) {
      CHECK_FALSE(l.closed);
      for (const auto& p : l.points) CHECK(p[0] * p[1] * c > 0.0);
    }
  }
}

TEST_CASE("segments lie on cell edges") {
  const Window2 w{};
  const std::size_t n = 32;
  const double h = 4.0 / n;
  for (const auto& l : marching_squares(kCircle, 1.0, w, n))
    for (const auto& p : l.points) {
      const double fu = (p[0] - w.u_lo) / h, fv = (p[1] - w.v_lo) / h;
      CHECK((std::fabs(fu - std::round(fu)) <= 1e-9 || std::fabs(fv - std::round(fv)) <= 1e-9));
    }
}

TEST_CASE("empty levels and gaps") {
  CHECK(marching_squares(kCircle, 100.0, {}, 16).empty());
  const PlaneFn bad = [](double u, double v) {
    if (u > 0.9) throw std::runtime_error("outside");
    return u * u + v * v;
  };
  const auto lines = marching_squares(bad, 1.0, {}, 64);
  CHECK_FALSE(lines.empty());
  for (const auto& l : lines) CHECK_FALSE(l.closed);
}

TEST_CASE("svg output") {
  std::vector<LevelContours> levels{{1.0, marching_squares(kCircle, 1.0, {}, 32)}};
  SvgStyle style;
  style.title = "u^2+v^2";
  const std::string a = render_svg(levels, {}, style);
  const std::string b = render_svg(levels, {}, style);
  CHECK(a == b);
  CHECK(a.rfind("<svg", 0) == 0);
  CHECK(a.find("u^2+v^2") != std::string::npos);
  CHECK(a.find("<path") != std::string::npos);
  CHECK(a.find(" Z") != std::string::npos);
}
