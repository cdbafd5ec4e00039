#pragma once

#include <cstddef>
#include <functional>

namespace optnet {

/// Worker count: OPTNET_THREADS if set, else hardware concurrency (at least 1).
std::size_t default_worker_count();

/// Runs body(i) for i in [0, n) on up to `workers` threads, each taking a
/// contiguous range. Callers write results by index, so the outcome does not
/// depend on scheduling. The first exception thrown by a worker is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t workers = default_worker_count());

}  // namespace optnet
