#ifndef REACFUSE_PARALLEL_HPP
#define REACFUSE_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace reacfuse {

// Global worker count for read-only batch work (featurization, embedding
// extraction, eval scoring). 1 = fully sequential. Gradient accumulation and
// optimizer steps never use this; they are single-writer by contract.
int worker_threads();
void set_worker_threads(int n);

// Runs fn(i) for i in [0, n). Results must be written to disjoint,
// preallocated slots so the output is identical for any thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace reacfuse

#endif
