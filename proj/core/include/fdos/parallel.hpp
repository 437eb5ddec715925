#pragma once

#include <cstddef>
#include <functional>

namespace fdos {

/// Worker count: FDOS_NUM_THREADS when set to a positive integer,
/// otherwise std::thread::hardware_concurrency() (at least 1).
std::size_t thread_count();

/// Runs task(i) for i in [0, count) on up to thread_count() threads.
/// Tasks must write only to their own output slot; the first exception
/// thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& task);

} // namespace fdos
