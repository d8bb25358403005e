#pragma once

#include <cstddef>
#include <functional>

namespace pro_ood {

// Worker count: hardware concurrency capped by the PRO_OOD_THREADS
// environment variable (values < 1 mean 1).
std::size_t worker_count();

// Runs fn(i) for i in [0, n) over contiguous index blocks. Bodies must write
// only to per-index slots; reductions happen after the join, so results do
// not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace pro_ood
