#pragma once

#include <cstddef>
#include <functional>

namespace hsi {

/// Worker cap for every parallel loop in the library. 0 restores the default
/// (HSI_THREADS if set, else hardware concurrency).
void set_thread_count(unsigned n);
unsigned thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, n). Callers must make
/// per-index results independent of chunking; no reduction happens here.
/// Nested calls from inside a worker run inline on that worker.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace hsi
