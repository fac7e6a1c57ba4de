#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace borglev {

/// Runs fn(i) for i in [0, n) on up to `threads` workers with a static block split.
/// Results must be written to per-index slots; the first exception is rethrown.
template <class F>
void parallel_for(std::size_t n, int threads, F&& fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::size_t(std::max(threads, 1)), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([&, t] {
            try {
                for (std::size_t i = t * chunk; i < std::min(n, (t + 1) * chunk); ++i) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace borglev
