#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace armpg::par {

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Number of chunks used by deterministic reductions. Fixed (independent of
/// the thread count) so per-chunk partial sums combine in the same order no
/// matter how many threads run, making results bit-identical across replays.
inline constexpr std::size_t kReductionChunks = 64;

/// Splits [0, n) into `num_chunks` contiguous ranges and calls
/// fn(chunk_index, begin, end) for each, in parallel. Chunk boundaries depend
/// only on n and num_chunks. Callers accumulate into per-chunk slots and
/// combine serially afterwards.
template <class ChunkFn>
void for_chunks(std::size_t n, std::size_t num_chunks, ChunkFn&& fn) {
  if (n == 0) return;
  if (num_chunks > n) num_chunks = n;
  const std::size_t base = n / num_chunks;
  const std::size_t rem = n % num_chunks;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (long long c = 0; c < static_cast<long long>(num_chunks); ++c) {
    const auto uc = static_cast<std::size_t>(c);
    // first `rem` chunks carry one extra element
    const std::size_t begin = uc * base + (uc < rem ? uc : rem);
    const std::size_t end = begin + base + (uc < rem ? 1 : 0);
    fn(uc, begin, end);
  }
}

/// Plain parallel loop for element-independent work (each index writes only
/// its own outputs, so scheduling cannot change the result).
template <class Fn>
void for_each_index(std::size_t n, Fn&& fn) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (long long i = 0; i < static_cast<long long>(n); ++i) {
    fn(static_cast<std::size_t>(i));
  }
}

}  // namespace armpg::par
