#pragma once

#include <cstddef>
#include <functional>

namespace prism {

// Worker count from PRISM_WORKERS, defaulting to the hardware concurrency.
std::size_t worker_count();

// Runs body(i) for i in [0, n). Each index must write only its own output
// slot; results are therefore independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t workers = 0);

}  // namespace prism
