#include "fiberlin/parallel.hpp"

#include <atomic>

namespace fiberlin {

namespace {
std::atomic<Exec> g_exec{Exec::Parallel};
}

Exec default_exec() noexcept { return g_exec.load(std::memory_order_relaxed); }

void set_default_exec(Exec exec) noexcept { g_exec.store(exec, std::memory_order_relaxed); }

void set_thread_count(int n) noexcept {
  if (n == 1) {
    set_default_exec(Exec::Serial);
    return;
  }
  set_default_exec(Exec::Parallel);
#ifdef _OPENMP
  if (n > 1) omp_set_num_threads(n);
#endif
}

}  // namespace fiberlin
