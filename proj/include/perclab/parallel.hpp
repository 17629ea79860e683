#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace perclab {

/// Worker count from PERC_LAB_WORKERS, else the hardware concurrency.
inline int default_workers() {
    if (const char* env = std::getenv("PERC_LAB_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls f(index, worker) for every index in [0, n). Indices are handed out in
/// small chunks from a shared counter, so the split across workers varies from
/// run to run; callers must combine results in an order-independent way or
/// store them by index.
template <class F>
void parallel_for(std::size_t n, int workers, F&& f, std::size_t chunk = 16) {
    workers = std::max(1, workers);
    if (workers == 1 || n <= chunk) {
        for (std::size_t i = 0; i < n; ++i) f(i, 0);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto body = [&](int worker) {
        try {
            for (;;) {
                const std::size_t begin = next.fetch_add(chunk);
                if (begin >= n) break;
                const std::size_t end = std::min(n, begin + chunk);
                for (std::size_t i = begin; i < end; ++i) f(i, worker);
            }
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
            next.store(n);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(body, w);
    body(0);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace perclab
