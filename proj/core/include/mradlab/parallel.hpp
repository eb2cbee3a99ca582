#pragma once

#include <cstddef>
#include <functional>

namespace mradlab {

// Worker count: MRADLAB_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
std::size_t default_thread_count();

// Runs body(begin, end) over contiguous chunks of [0, n) on up to `threads`
// threads (0 = default_thread_count()). Chunk boundaries never influence
// results as long as body writes only to indices it owns.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace mradlab
