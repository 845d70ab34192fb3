#pragma once

// Minimal fan-out over an index range. The worker count comes from the
// environment variable LORTZ_THREADS (default: hardware concurrency).

#include <functional>

namespace lortz {

int worker_count();

// Runs fn(i) for i in [0, n) on up to worker_count() threads. Rethrows the
// first exception raised by any worker.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace lortz
