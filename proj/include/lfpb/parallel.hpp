#pragma once

#include <functional>

namespace lfpb {

/// Cap on worker threads used by per-view loops. 0 selects the hardware
/// concurrency.
void set_thread_count(int n);
int thread_count();

/// Runs fn(i) for i in [0, n). Iterations must be independent; the result
/// never depends on the thread count.
void parallel_for(int n, const std::function<void(int)>& fn);

}  // namespace lfpb
