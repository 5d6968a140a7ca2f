#pragma once

#include <cstddef>
#include <functional>

namespace fvc {

// Upper bound on worker threads used inside the library. 0 or 1 runs
// everything on the calling thread. Results never depend on this value.
void set_thread_limit(std::size_t threads);
std::size_t thread_limit();

// Calls fn(i) for i in [0, count). Work is split into contiguous blocks;
// each index is visited exactly once and fn must only write state owned by i.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace fvc
