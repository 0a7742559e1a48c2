#pragma once

#include <cstddef>
#include <functional>

namespace phasekit {

/// Worker count for sweeps: PHASEKIT_THREADS when set to a positive integer,
/// otherwise the hardware concurrency (at least 1).
[[nodiscard]] std::size_t sweep_threads();

/// Calls body(i) for i in [0, n) on up to `threads` workers. Each index is
/// handled exactly once; callers write results into slot i so the output
/// order never depends on scheduling. The first exception thrown (lowest
/// index) is rethrown after all workers join.
void parallel_for(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace phasekit
