#pragma once
#include <algorithm>
#include <thread>
#include <vector>

namespace biphoton::detail {

/// Run fn(i) for i in [0, count) split across threads. Callers write
/// results by index, so the outcome is independent of scheduling.
template <typename Fn>
void parallel_for(int count, Fn&& fn) {
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    const int n_threads = std::clamp(std::min(hw, count), 1, 16);
    if (n_threads <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&fn, t, count, n_threads] {
            for (int i = t; i < count; i += n_threads) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace biphoton::detail
