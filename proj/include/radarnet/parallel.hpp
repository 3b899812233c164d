#pragma once

#include <functional>

namespace radarnet {

// Worker count from RADARNET_THREADS, else the hardware concurrency (>= 1).
int default_thread_count();

// Runs body(0) .. body(count - 1) on up to `threads` workers. The first
// exception thrown by any task is rethrown after all workers finish.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

}  // namespace radarnet
