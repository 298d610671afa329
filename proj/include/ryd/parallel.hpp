#pragma once
#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace ryd {

// Index-parallel map. Each job writes only to its own slot, so any
// aggregation done afterwards in index order is scheduling-independent.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         unsigned workers = 0) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const unsigned m = static_cast<unsigned>(std::min<std::size_t>(workers, n));
    pool.reserve(m);
    for (unsigned t = 0; t < m; ++t) pool.emplace_back(run);
    for (auto& th : pool) th.join();
}

// Process-wide default worker count, settable from the CLI.
unsigned default_workers();
void set_default_workers(unsigned w);

} // namespace ryd
