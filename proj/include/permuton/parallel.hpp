#pragma once

#include <cstddef>
#include <functional>

namespace permuton {

// PERMUTON_LAB_THREADS when set to a positive integer, else the hardware
// concurrency (at least 1).
unsigned default_thread_count();

// Calls fn(i) for every i in [0, count) on up to `threads` workers (0 means
// default_thread_count()). The first exception thrown by any call is
// rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace permuton
