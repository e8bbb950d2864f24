#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace nqkr {

// Runs task(i) for i in [0, count) on up to `workers` threads. Tasks write to
// pre-indexed slots, so the outcome never depends on scheduling. The first
// exception thrown by any task is rethrown after all threads join.
template <class Task>
void parallel_for(std::size_t count, int workers, Task&& task) {
    const std::size_t n_threads =
        std::min<std::size_t>(count, static_cast<std::size_t>(std::max(workers, 1)));
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(n_threads);
        for (std::size_t w = 0; w < n_threads; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        task(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace nqkr
