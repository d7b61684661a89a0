#pragma once

#include <functional>

namespace epirenew {

// Worker count: requested if positive, else the EPIRENEW_THREADS environment
// variable, else the hardware concurrency (at least 1).
int resolve_threads(int requested);

// Runs fn(0..n-1) across up to `threads` workers; fn must be thread-safe.
// Exceptions from workers are rethrown on the calling thread.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace epirenew
