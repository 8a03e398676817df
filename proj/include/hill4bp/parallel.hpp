#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace hill4bp {

/// Runs fn(i) for i in [0, n) on a small thread pool. Work items must be
/// independent; results are gathered by index so output order is
/// deterministic. The first exception, if any, is rethrown.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn, unsigned threads_hint = 0) {
    unsigned nthreads = threads_hint ? threads_hint : std::thread::hardware_concurrency();
    if (nthreads == 0) nthreads = 1;
    if (nthreads == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < nthreads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failed.load() && error) std::rethrow_exception(error);
}

} // namespace hill4bp
