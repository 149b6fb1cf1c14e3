#pragma once

#include <cstddef>
#include <functional>

namespace mzi {

// Upper bound on worker threads used by parallel_for. 0 means hardware concurrency.
void set_max_threads(unsigned count);
unsigned max_threads();

// Calls body(i) for i in [0, count). Each index is handled by exactly one
// worker, so writes to distinct slots need no synchronization. The first
// exception thrown by any worker is rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace mzi
