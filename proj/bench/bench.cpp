// Serial reference path vs OpenMP path on the grid kernels.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "fiberlin/estimates.hpp"
#include "fiberlin/foliation.hpp"
#include "fiberlin/linearize.hpp"
#include "fiberlin/parallel.hpp"
#include "fiberlin/symmetry.hpp"

using namespace fiberlin;

namespace {

double seconds(const std::function<double()>& run, double& sink, int reps) {
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) sink += run();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

void row(const std::string& name, const std::function<double()>& run, int reps = 3) {
  double s = 0.0, p = 0.0;
  set_default_exec(Exec::Serial);
  const double ts = seconds(run, s, reps);
  set_default_exec(Exec::Parallel);
  const double tp = seconds(run, p, reps);
  std::printf("%-28s %10.4f %10.4f %7.2fx %s\n", name.c_str(), ts, tp, ts / tp, s == p ? "same" : "DIFFERENT");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("threads: %d\n", omp_get_max_threads());
#endif
  std::printf("%-28s %10s %10s %8s\n", "kernel", "serial s", "omp s", "speedup");

  const Domain dom{{0.0}, {1.0}, 0.5};
  const BundleMap h = BundleMap::from_expressions(1, 1, {"x + v^2"}, {"v*exp(x) + sin(v)^3"}, dom);
  const auto K = estimate_samples(dom, 1, 0.1, 9, 21);
  HomotopyConfig cfg;
  cfg.delta = 0.1;

  row("seminorm order 3", [&] { return seminorm(h.function(), 3, K, 2, 1, false, default_exec()); });
  row("verify_estimates", [&] {
    const EstimateReport r = verify_estimates(h, cfg, 0.5, K);
    return r.records[0].lhs + r.records[4].lhs;
  });

  std::vector<Vector> grid = domain_samples(dom, 1, 17, 65, 0.5);
  const BundleMap H = homotopy_map(h, cfg, 0.0);
  row("injectivity certificate", [&] {
    return injectivity_certificate(H.function(), grid, 1.0 / 64, kDefaultInjectivityRatio, default_exec()).min_ratio;
  });

  const HomogeneousFn g("u*v*(u^2+v^2)*(2*u-v)", 5.0);
  LabelingOptions lo;
  lo.resolution = 1024;
  row("level components 1024^2", [&] { return double(level_components(g, 0.5, {}, lo).components); });
  row("lin_group (4096 angles)", [&] { return lin_group(HomogeneousFn("u^4+v^4", 4.0)).residual; }, 1);
  return 0;
}
