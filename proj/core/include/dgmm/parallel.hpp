#ifndef DGMM_PARALLEL_HPP
#define DGMM_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace dgmm::detail {

// Runs body(i) for i in [0, count) on up to `threads` workers. threads <= 1
// (or count < 2) executes inline. The first exception thrown by any worker
// is rethrown on the caller after all workers join.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& body);

}  // namespace dgmm::detail

#endif
