#pragma once

#include <cstddef>
#include <functional>

namespace riskmmd {

// Global worker count, settable from the CLI (--threads / RISKMMD_THREADS).
// 0 means "use hardware concurrency".
int thread_count();
void set_thread_count(int n);

// Static block partition of [0, n) over the configured workers. Each index
// is processed exactly once; callers must make fn(i) independent of schedule
// (own output slot, own RNG substream) so any thread count gives identical
// results.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace riskmmd
