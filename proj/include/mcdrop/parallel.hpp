#pragma once

#include <cstddef>
#include <functional>

namespace mcdrop {

// Worker cap: MCDROP_THREADS if set to a positive integer, else hardware concurrency.
std::size_t worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index is
// executed exactly once; if any call throws, the exception from the lowest
// failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mcdrop
