#include "hct/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace hct {

int default_jobs() {
    if (const char* env = std::getenv("HCT_JOBS")) {
        const int j = std::atoi(env);
        if (j >= 1) return j;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::clamp(hw, 1u, 8u));
}

void parallel_for(index_t n, int jobs, const std::function<void(index_t)>& fn) {
    parallel_chunks(n, jobs, [&fn](int, index_t lo, index_t hi) {
        for (index_t i = lo; i < hi; ++i) fn(i);
    });
}

void parallel_chunks(index_t n, int jobs,
                     const std::function<void(int chunk, index_t lo, index_t hi)>& fn) {
    if (n <= 0) return;
    jobs = static_cast<int>(std::min<index_t>(std::max(jobs, 1), n));
    if (jobs == 1) {
        fn(0, 0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    const index_t chunk = (n + jobs - 1) / jobs;
    for (int t = 0; t < jobs; ++t) {
        const index_t lo = t * chunk;
        const index_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, t, lo, hi] { fn(t, lo, hi); });
    }
    for (auto& th : pool) th.join();
}

} // namespace hct
