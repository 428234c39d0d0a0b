#pragma once

#include <cstddef>
#include <functional>

namespace eit {

/// Effective worker count used by parallel_for (>= 1).
int max_threads();

/// Cap the worker count globally; n <= 0 restores the hardware default.
void set_max_threads(int n);

/// Run fn(i) for i in [0, n) on up to max_threads() workers, split into
/// contiguous chunks. Each index is visited exactly once, so writes to
/// per-index slots need no synchronization. The first exception thrown by
/// any worker is rethrown on the calling thread after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace eit
