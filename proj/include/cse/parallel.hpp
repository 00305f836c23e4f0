#pragma once
#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cse {

/*
 * Runs f(i) for i in [0, n_items) on `threads` workers pulling indices
 * from a shared counter. Callers write results to slots indexed by i,
 * so output never depends on scheduling. The first exception thrown by
 * any worker is rethrown on the calling thread.
 */
template <class F>
void parallel_for(std::size_t n_items, std::size_t threads, F&& f) {
    threads = std::max<std::size_t>(1, std::min(threads, n_items));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n_items; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n_items) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n_items, std::memory_order_relaxed);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace cse
