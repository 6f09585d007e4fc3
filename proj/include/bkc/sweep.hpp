// sweep.hpp — Worker pool over independent grid points with deterministic
// result placement.

#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace bkc::sweep {

// Runs f(0..n-1), each index exactly once. With threads > 1 the indices are
// claimed from a shared counter; callers write results into pre-sized slots so
// output order never depends on scheduling. The first exception is rethrown
// after all workers join.
template <class F>
void run_indexed(std::size_t n, unsigned threads, F&& f) {
    if (n == 0) return;
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned nw = std::min<std::size_t>(threads, n);
    pool.reserve(nw);
    for (unsigned w = 0; w < nw; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

// Thread count resolution: explicit flag > BKC_THREADS env > hardware.
unsigned resolve_threads(int flag_value);

}  // namespace bkc::sweep
