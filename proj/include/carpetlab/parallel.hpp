#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace carpetlab {

/// Runs body(i) for i in [0, count) on up to `threads` workers. Indices are
/// split into contiguous blocks, so callers that write results by index get
/// the same output for any thread count. The first exception is rethrown.
inline void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            const int lo = static_cast<int>(static_cast<long>(count) * w / threads);
            const int hi = static_cast<int>(static_cast<long>(count) * (w + 1) / threads);
            try {
                for (int i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace carpetlab
