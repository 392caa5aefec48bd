#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace latmem {

/// Runs fn(i) for i in [0, n) on up to `workers` threads (strided split).
/// The first exception raised by any worker is rethrown after all join.
template <class Fn>
inline void parallel_for(std::size_t n, int workers, Fn&& fn)
{
    workers = std::max(1, workers);
    if (workers == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace latmem
