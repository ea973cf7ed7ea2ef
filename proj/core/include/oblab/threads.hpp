#pragma once

#include <cstddef>
#include <functional>

namespace oblab {

// Worker count: min(hardware, LAB_THREADS when set). At least 1.
int thread_count();

// Runs fn(begin, end) over [0, n) split into contiguous blocks, one per
// worker. Blocks are disjoint, so any fn without cross-block writes is
// bitwise deterministic regardless of the worker count.
void parallel_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace oblab
