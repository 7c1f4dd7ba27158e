#pragma once

#include <cstddef>
#include <functional>

namespace persistx {

/// Worker count: explicit value if nonzero, else $PERSISTX_THREADS, else
/// hardware concurrency (at least 1).
unsigned resolve_threads(unsigned requested = 0);

/// Runs body(begin, end, chunk) over [0, count) split into `threads` contiguous
/// chunks.  Chunk boundaries depend only on (count, threads); callers that
/// need schedule-independent results must make each index's work
/// self-contained.  Exceptions from workers are rethrown on the caller.
void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

} // namespace persistx
