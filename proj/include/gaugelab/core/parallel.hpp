#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gaugelab {

/// Node-wise loop; iterations must be independent. Results do not depend on
/// the thread count because each index writes only its own outputs.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n); ++k) fn(static_cast<std::size_t>(k));
#else
  for (std::size_t k = 0; k < n; ++k) fn(k);
#endif
}

inline void set_thread_count(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

}  // namespace gaugelab
