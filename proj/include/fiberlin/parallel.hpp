#pragma once

// Grid kernels run either serially (the reference path) or with OpenMP.
// Results are written per index and reduced in index order afterwards, so
// both paths return bit-identical values.

#include <cstddef>
#include <exception>
#include <mutex>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fiberlin {

enum class Exec { Serial, Parallel };

/// Process-wide default used by the modules; the CLI sets it from --threads.
Exec default_exec() noexcept;
void set_default_exec(Exec exec) noexcept;
void set_thread_count(int n) noexcept;

/// out[i] = fn(i) for i in [0, n).
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn, Exec exec = default_exec()) {
  std::vector<T> out(n);
  if (exec == Exec::Serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (long long i = 0; i < count; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return out;
}

/// Index of the largest element; ties go to the smallest index.
template <class T>
std::size_t argmax(const std::vector<T>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

template <class T>
std::size_t argmin(const std::vector<T>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] < values[best]) best = i;
  return best;
}

}  // namespace fiberlin
