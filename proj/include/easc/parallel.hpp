// parallel.hpp: Index-slot fan-out used by sweeps
//
// Work items write into their own output slot, so results never depend on
// scheduling order.

#pragma once

#include <cstddef>
#include <functional>

namespace easc {

// Worker count: EASC_THREADS if set, else hardware concurrency (at least 1).
unsigned default_thread_count();

// Calls body(i) for i in [0, count). The first exception thrown by any item is
// rethrown after all workers have stopped.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

} // namespace easc
