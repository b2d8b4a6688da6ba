#pragma once

#include <cstddef>
#include <functional>

namespace sovkit {

// Worker count: SOV_VERIFY_THREADS if set, else hardware concurrency.
unsigned worker_count();

// Runs body(i) for i in [0, n); results must be written to disjoint slots.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sovkit
