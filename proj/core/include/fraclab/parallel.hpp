#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fraclab {

/// Number of worker threads used by parallel_for. Resolution order:
/// set_thread_count() override, FRACLAB_THREADS env var, hardware_concurrency.
int thread_count();
void set_thread_count(int n);

/// Static block partition of [begin, end); f(i) must only write to slots owned
/// by index i. The partition depends only on (end - begin), never on the
/// thread count, so any reduction over per-index slots is schedule-independent.
void parallel_for(std::int64_t begin, std::int64_t end,
                  const std::function<void(std::int64_t)>& f);

/// Chunked variant: f(chunk_begin, chunk_end). Chunk boundaries are fixed by
/// the range length alone.
void parallel_for_chunks(std::int64_t begin, std::int64_t end,
                         const std::function<void(std::int64_t, std::int64_t)>& f);

/// Deterministic pairwise tree reduction; the result is a pure function of the
/// input ordering, independent of thread count.
double pairwise_sum(std::span<const double> a);

}  // namespace fraclab
