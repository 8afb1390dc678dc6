#ifndef QKELLY_PARALLEL_HPP
#define QKELLY_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace qkelly {

/// Worker cap: QKELLY_THREADS when set to a positive integer, else the hardware concurrency.
inline std::size_t worker_count()
{
    if (const char* env = std::getenv("QKELLY_THREADS")) {
        try {
            long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

/// Runs fn(i) for i in [0, n). The first exception thrown by any worker is rethrown.
template <class F>
void parallel_for(std::size_t n, F&& fn, std::size_t threads = worker_count())
{
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

struct ParallelFor {
    template <class F>
    void operator()(std::size_t n, F&& fn) const
    {
        parallel_for(n, std::forward<F>(fn));
    }
};

} // namespace qkelly

#endif // QKELLY_PARALLEL_HPP
