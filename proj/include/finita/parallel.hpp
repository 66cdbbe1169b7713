#pragma once

#include <cstddef>
#include <functional>

namespace finita {

/// Worker count: set_thread_count() if called, else FINITA_THREADS, else 1.
int thread_count();
void set_thread_count(int threads);

/// Runs body(i) for i in [0, count) across thread_count() workers in
/// contiguous chunks. Callers write results into per-index slots and reduce
/// in index order, which keeps outputs independent of the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace finita
