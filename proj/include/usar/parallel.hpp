#pragma once

#include <cstddef>
#include <functional>

namespace usar {

// Worker cap: min(hardware_concurrency, USAR_THREADS when set). Always >= 1.
int worker_count();

// Runs fn(i) for i in [0, n) split into contiguous blocks across workers.
// Callers must write only to i-indexed slots; outputs are then independent of
// scheduling and of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace usar
