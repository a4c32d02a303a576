#pragma once

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace gfmmd {

/// Worker cap for library-internal parallel loops. Reads GFMMD_THREADS once;
/// unset or invalid values fall back to the hardware thread count.
inline int max_threads() {
    static const int cached = [] {
        if (const char* env = std::getenv("GFMMD_THREADS")) {
            char* end = nullptr;
            long v = std::strtol(env, &end, 10);
            if (end != env && v >= 1) return static_cast<int>(std::min<long>(v, 256));
        }
        unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }();
    return cached;
}

namespace detail {

/// Runs body(i) for i in [begin, end) on up to max_threads() workers.
/// Work is split into contiguous chunks, one per worker; every index is
/// processed exactly once and writes must be to disjoint slots, so results
/// do not depend on the number of workers.
template <typename Body>
void parallel_for(int begin, int end, Body&& body) {
    const int count = end - begin;
    if (count <= 0) return;
    const int workers = std::min(max_threads(), count);
    if (workers <= 1) {
        for (int i = begin; i < end; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int chunk = (count + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const int lo = begin + w * chunk;
        const int hi = std::min(end, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (int i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace detail
}  // namespace gfmmd
