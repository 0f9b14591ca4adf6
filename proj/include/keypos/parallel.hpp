#pragma once

#include <cstddef>
#include <functional>

namespace keypos {

/// Worker count: KEYPOS_THREADS if set (min 1), else hardware concurrency.
int workerCount();

/// Runs fn(i) for i in [0, n). Work items must be independent; they are
/// distributed over workerCount() threads. Falls back to a serial loop for
/// a single worker. Exceptions from workers are rethrown on the caller.
void parallelFor(std::size_t n, const std::function<void(std::size_t)>& fn);

} // namespace keypos
