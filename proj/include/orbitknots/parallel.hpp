#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace orbitknots {

// Global worker cap, set once by the CLI (--threads). 0 = hardware default.
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [0, n). Work is split into contiguous index blocks;
// each result must be written to caller-owned storage indexed by i, so the
// outcome is independent of the thread count. fn must not throw.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace orbitknots
