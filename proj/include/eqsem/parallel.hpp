#pragma once

#include <functional>

namespace eqsem {

/// Worker count from EQSEM_THREADS (default 1; "0" means hardware threads).
[[nodiscard]] int worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. The first
/// exception thrown by any task is rethrown after all workers finish.
void parallel_for(int n, const std::function<void(int)>& body);

}  // namespace eqsem
