#pragma once

#include <functional>

namespace qoct {

// Number of worker threads, from QOCT_THREADS (>= 1); defaults to the
// hardware count capped at 8.
int thread_count();

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks and each
// index writes only its own outputs, so results are identical for any thread
// count.
void parallel_for(int n, const std::function<void(int)>& fn);

} // namespace qoct
