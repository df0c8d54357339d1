#pragma once

#include <functional>

namespace infhs::threads {

// Worker cap: INFHS_THREADS if set (clamped to >= 1), else hardware
// concurrency. Read on every call so tests and CLI runs can vary it.
int max_threads();

// Runs body(i) for i in [0, n) with a static contiguous partition over at
// most max_threads() workers. Each index is processed exactly once and
// results must be written to per-index slots, so the outcome is identical
// for every thread count. The first exception thrown by any worker is
// rethrown after all workers join.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace infhs::threads
