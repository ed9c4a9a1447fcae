#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace paraqa {

/// Runs fn(i) for i in [0, n). With threads <= 1 this is a plain loop.
/// Workers write only to their own index's outputs; callers that reduce must
/// do so afterwards in index order so results are independent of scheduling.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            for (std::size_t i = w; i < n; i += workers) {
                fn(i);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
}

}  // namespace paraqa
