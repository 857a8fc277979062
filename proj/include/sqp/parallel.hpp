#pragma once

#include <cstddef>
#include <functional>

namespace sqp {

/// Worker count for data-parallel sections: the SQP_WORKERS environment
/// variable when set (clamped to >= 1), else the process-wide override, else
/// 1 (single-threaded).
int worker_count();

/// Programmatic override (e.g. the CLI --workers flag); 0 clears it.
void set_worker_count(int workers);

/// Runs body(i) for i in [0, n). With more than one worker, indices are
/// split into contiguous chunks across threads; each index is visited
/// exactly once, so writes to disjoint slots need no synchronization.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sqp
