#pragma once

#include <cstddef>
#include <functional>

namespace topemb {

// Process-wide worker count used by the per-point / per-query loops.
// 0 or 1 runs inline. Results never depend on this value.
void set_num_threads(unsigned n);
unsigned num_threads();

// Calls fn(i) for i in [0, n). Each index is visited exactly once; callers
// only write to slots owned by their index.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace topemb
