#include <doctest.h>

#include <cmath>
#include <vector>

#include "fiberlin/linearize.hpp"

using namespace fiberlin;

namespace {

const Domain kPoint{{}, {}, 1.0};
const Domain kUnit{{0.0}, {1.0}, 1.0};

BundleMap point_map(const char* b, const Domain& d = kPoint) { return BundleMap::from_expressions(0, 1, {}, {b}, d); }

HomotopyConfig config(double delta) {
  HomotopyConfig c;
  c.delta = delta;
  return c;
}

}  // namespace

TEST_CASE("bump function") {
  CHECK(mu(1.0) == 0.0);
  CHECK(mu(2.0) == 1.0);
  CHECK(mu(1.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(mu(0.0) == 0.0);
  CHECK(mu(7.0) == 1.0);
  CHECK_THROWS_AS(mu(-0.1), std::invalid_argument);
  double prev = 0.0;
  for (int i = 0; i <= 300; ++i) {
    const double m = mu(i / 100.0);
    CHECK(m >= prev);
    prev = m;
  }
  for (double s : {1.1, 1.3, 1.77}) CHECK(mu(s) + mu(3.0 - s) == doctest::Approx(1.0).epsilon(1e-14));
  const BumpFunction b;
  // sigma'(1/2) = 2 is the maximum slope of the profile on [1, 2].
  CHECK(b.sup_derivative() == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(b.derivative(1.5) == doctest::Approx((mu(1.5 + 1e-6) - mu(1.5 - 1e-6)) / 2e-6).epsilon(1e-6));
  const BumpFunction wide(0.5, 3.0);
  CHECK(wide(0.5) == 0.0);
  CHECK(wide(3.0) == 1.0);
  CHECK_THROWS(BumpFunction(2.0, 1.0));
}

TEST_CASE("phi") {
  const HomotopyConfig c = config(0.1);
  CHECK(phi(c, 1.0, {{}, {0.01}}) == 1.0);
  CHECK(phi(c, 0.3, {{}, {0.05}}) == 0.3);
  CHECK(phi(c, 0.3, {{}, {0.25}}) == 1.0);
  CHECK(phi(c, 0.3, {{}, {0.2}}) == 1.0);
  const double mid = phi(c, 0.3, {{}, {0.15}});
  CHECK(mid == doctest::Approx(0.3 + 0.7 * 0.5));
}

TEST_CASE("linhom endpoints") {
  const BundleMap id = BundleMap::from_expressions(1, 1, {"x"}, {"v"}, kUnit);
  for (double t : {0.0, 0.4, 1.0})
    for (double v : {0.0, 0.05, 0.15, 0.5}) {
      const BundlePoint img = linhom(id, config(0.1), t, {{0.3}, {v}});
      CHECK(img.x[0] == 0.3);
      CHECK(std::fabs(img.v[0] - v) <= 1e-15);
    }

  const BundleMap cubic = point_map("v + v^3");
  for (double v : {-0.1, -0.03, 0.0, 0.07, 0.1}) {
    const BundlePoint p{{}, {v}};
    CHECK(std::fabs(linhom(cubic, config(0.1), 1.0, p).v[0] - (v + v * v * v)) <= 1e-12);
    CHECK(std::fabs(linhom(cubic, config(0.1), 0.0, p).v[0] - v) <= 1e-8);
  }
  CHECK_THROWS_AS(linhom(cubic, config(0.1), 0.5, {{}, {1.5}}), DomainError);
}

TEST_CASE("homotopy blocks") {
  const BundleMap h = BundleMap::from_expressions(1, 1, {"x + x*v"}, {"v*exp(x) + v^2"}, kUnit);
  const BundlePoint p{{0.4}, {0.05}};
  const JacobianBlocks a = homotopy_blocks(h, config(0.1), 1.0, p);
  const JacobianBlocks b = jacobian_blocks(h, p);
  CHECK((a.P - b.P).cwiseAbs().maxCoeff() <= 1e-5);
  CHECK((a.Q - b.Q).cwiseAbs().maxCoeff() <= 1e-5);
  CHECK((a.S - b.S).cwiseAbs().maxCoeff() <= 1e-5);

  for (double x : {0.2, 0.5, 0.8}) CHECK(std::fabs(homotopy_blocks(h, config(0.1), 0.0, {{x}, {0.0}}).Q(0, 0)) <= 1e-6);

  const BundleMap lin = BundleMap::from_expressions(1, 1, {"x"}, {"(1 + x)*v"}, kUnit);
  const JacobianBlocks ref = jacobian_blocks(lin, p);
  for (double d : {0.05, 0.2})
    for (double t : {0.0, 0.5}) CHECK((homotopy_blocks(lin, config(d), t, p).S - ref.S).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("singular values and rank threshold") {
  Eigen::MatrixXd m(2, 2);
  m << 3.0, 0.0, 0.0, -2.0;
  CHECK(singular_value(m, 1) == doctest::Approx(3.0));
  CHECK(singular_value(m, 2) == doctest::Approx(2.0));
  CHECK(singular_value(m, 3) == 0.0);
  CHECK(rank_threshold(m) == doctest::Approx(1e-8 * 4.0));
}

TEST_CASE("rank certificate") {
  const std::vector<Vector> base{{0.0}, {0.5}, {1.0}};
  const std::vector<double> ts{0.0, 0.5, 1.0};
  const BundleMap twice = BundleMap::from_expressions(1, 1, {"x"}, {"2*v"}, kUnit);
  const RankReport r = rank_certificate(twice, config(0.1), 1, 1, base, ts);
  CHECK(r.pass);
  CHECK(r.min_sigma_s == doctest::Approx(2.0).epsilon(1e-8));

  const BundleMap zero = BundleMap::from_expressions(1, 1, {"x"}, {"0*v"}, kUnit);
  CHECK_FALSE(rank_certificate(zero, config(0.1), 0, 1, base, ts).pass);

  // Analytic oracle: S of H at (x, 0) is e^x for every t.
  const BundleMap ex = BundleMap::from_expressions(1, 1, {"x + v^2"}, {"v*exp(x)"}, kUnit);
  for (double d : {0.1, 0.05}) {
    const RankReport e = rank_certificate(ex, config(d), 1, 1, base, ts);
    CHECK(e.pass);
    CHECK(e.min_sigma_s == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("injectivity certificate") {
  std::vector<Vector> grid;
  for (int i = -20; i <= 20; ++i) grid.push_back({i / 20.0});
  const VectorField id = [](std::span<const double> p) { return Vector(p.begin(), p.end()); };
  const InjectivityReport r = injectivity_certificate(id, grid, 0.05);
  CHECK(r.pass);
  CHECK(r.min_ratio == doctest::Approx(1.0));

  const VectorField constant = [](std::span<const double>) { return Vector{0.5}; };
  CHECK_FALSE(injectivity_certificate(constant, grid, 0.05).pass);

  std::vector<Vector> fine;
  for (int i = -100; i <= 100; ++i) fine.push_back({i / 100.0});
  const VectorField cube = [](std::span<const double> p) { return Vector{p[0] * p[0] * p[0]}; };
  const InjectivityReport c = injectivity_certificate(cube, fine, 0.01, 0.5);
  CHECK_FALSE(c.pass);
  CHECK(c.min_ratio == doctest::Approx(1e-4).epsilon(1e-6));

  CHECK(injectivity_certificate(id, grid, 0.05, 1e-3, Exec::Serial).min_ratio ==
        injectivity_certificate(id, grid, 0.05, 1e-3, Exec::Parallel).min_ratio);
}

TEST_CASE("support check") {
  const BundleMap cubic = point_map("v + v^3");
  const std::vector<double> all{0.0, 0.25, 0.5, 0.75, 1.0};
  const std::vector<Vector> outer{{0.25}, {-0.25}, {0.2}, {0.9}};
  CHECK(support_check(cubic, config(0.1), all, outer) <= 1e-12);

  const std::vector<double> t0{0.0};
  const std::vector<Vector> inner{{0.15}};
  const double v = 0.15, f = phi(config(0.1), 0.0, {{}, {v}});
  const double oracle = std::fabs((f * v + std::pow(f * v, 3)) / f - (v + v * v * v));
  CHECK(support_check(cubic, config(0.1), t0, inner) == doctest::Approx(oracle).epsilon(1e-10));
  CHECK(oracle > 1e-4);

  const std::vector<double> t1{1.0};
  const std::vector<Vector> anywhere{{0.0}, {0.01}, {0.1}};
  CHECK(support_check(cubic, config(0.1), t1, anywhere) == 0.0);
}

TEST_CASE("delta search") {
  DeltaSearchOptions opt;
  const BundleMap id = point_map("v");
  const DeltaSearchResult r = admissible_delta(id, CertificateKind::embedding(), 0.4, opt);
  REQUIRE(r.delta);
  CHECK(*r.delta == 0.4);
  const DeltaSearchResult rr = admissible_delta(id, CertificateKind::rank(0, 1), 0.4, opt);
  REQUIRE(rr.delta);
  CHECK(*rr.delta == 0.4);

  const DeltaSearchResult c = admissible_delta(point_map("v + v^3"), CertificateKind::embedding(), 0.5, opt);
  REQUIRE(c.delta);
  CHECK(*c.delta > 0.0);
  CHECK(c.trials.back().pass());

  const DeltaSearchResult z = admissible_delta(point_map("0*v"), CertificateKind::rank(0, 1), 0.5, opt);
  CHECK_FALSE(z.delta);
  CHECK_FALSE(z.map_qualifies);
  CHECK_FALSE(z.failure_reason.empty());

  CHECK_THROWS_AS(admissible_delta(id, CertificateKind::embedding(), 1.0, opt), ConfigError);
  CHECK_THROWS_AS(admissible_delta(id, CertificateKind::embedding(), 0.0, opt), ConfigError);
}

TEST_CASE("evaluate_delta rejects images outside the codomain") {
  const BundleMap h = point_map("3*v").with_codomain(Domain{{}, {}, 1.0});
  DeltaSearchOptions opt;
  const DeltaTrial big = evaluate_delta(h, CertificateKind::embedding(), 0.5, opt);
  CHECK_FALSE(big.image_ok);
  const DeltaTrial small = evaluate_delta(h, CertificateKind::embedding(), 0.3, opt);
  CHECK(small.image_ok);
}

TEST_CASE("shell samples") {
  const auto pts = shell_samples(kUnit, 2, 0.2, 0.4, 100);
  CHECK(pts.size() >= 100);
  for (const Vector& p : pts) {
    const double r = std::hypot(p[1], p[2]);
    CHECK(((r >= 0.2 - 1e-12 && r <= 0.4 + 1e-12) || r == 0.0));
  }
  CHECK(base_grid(kUnit, 5).size() == 5);
  CHECK(base_grid(kPoint, 5).size() == 1);
}
