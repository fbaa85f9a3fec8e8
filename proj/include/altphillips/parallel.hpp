#pragma once

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace ap {

/// Global worker count for interior sweeps. Affects speed only: every parallel
/// loop writes to disjoint per-index slots, so results are bitwise identical
/// for any thread count.
inline std::atomic<int>& thread_count() {
    static std::atomic<int> n{1};
    return n;
}

inline void set_thread_count(int n) { thread_count().store(n < 1 ? 1 : n); }

template <typename F>
void parallel_for(int begin, int end, F&& body) {
    const int n = end - begin;
    if (n <= 0) return;
    const int workers = std::min(thread_count().load(), n);
    if (workers <= 1 || n < 4096) {
        for (int i = begin; i < end; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    const int chunk = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int lo = begin + w * chunk;
        const int hi = std::min(lo + chunk, end);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (int i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace ap
