#pragma once

// Minimal fork-join helper. The worker count is the hardware concurrency,
// capped by the AGGRE_THREADS environment variable when set.

#include <cstddef>
#include <functional>

namespace aggre {

unsigned worker_count(std::size_t jobs);

/// Runs body(i) for i in [0, n). Work is handed out dynamically; the first
/// exception thrown by any job is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace aggre
