#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace cpd {

inline int default_jobs() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Run fn(begin, end) over a static block partition of [0, n). Work items
/// must be independent; the partition depends only on (n, jobs), so results
/// written by index are schedule-independent.
inline void parallel_for_blocks(int n, int jobs, const std::function<void(int, int)>& fn) {
    if (jobs <= 0) jobs = default_jobs();
    jobs = std::min(jobs, n);
    if (jobs <= 1) {
        if (n > 0) fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    const int chunk = (n + jobs - 1) / jobs;
    for (int w = 0; w < jobs; ++w) {
        const int begin = w * chunk;
        const int end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : pool) t.join();
}

} // namespace cpd
