#pragma once

#include <functional>

namespace glim {

// Runs fn(i) for i in [0, n) on up to n_threads workers. Indices are dealt in
// fixed contiguous blocks, so which worker runs which index never depends on
// scheduling; fn must only write state owned by index i. The first exception
// thrown in any worker is rethrown on the calling thread.
void parallel_for(int n, int n_threads, const std::function<void(int)>& fn);

}  // namespace glim
