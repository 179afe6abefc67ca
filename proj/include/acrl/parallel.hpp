#pragma once

#include <chrono>
#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace acrl {

enum class Exec { Serial, Parallel };

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

inline double wall_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// Runs fn(0..n-1). In Parallel mode fn(i) may only write to slot i of shared
// outputs; all cross-slot reductions happen afterwards in index order, so the
// result is bit-identical to Serial for any thread count.
template <class F>
void parallel_for(std::size_t n, Exec mode, F&& fn) {
#ifdef _OPENMP
  if (mode == Exec::Parallel && n > 1) {
#pragma omp parallel for schedule(dynamic)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      fn(static_cast<std::size_t>(i));
    }
    return;
  }
#endif
  (void)mode;
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace acrl
