#pragma once

#include <functional>

#include "hct/grid.hpp"

namespace hct {

/// Worker count: HCT_JOBS env var if set, else hardware concurrency capped at 8.
int default_jobs();

/// Runs fn(i) for i in [0, n), split into contiguous chunks across `jobs`
/// threads (sequential when jobs <= 1). Callers write to disjoint slots, so
/// results do not depend on scheduling.
void parallel_for(index_t n, int jobs, const std::function<void(index_t)>& fn);

/// Chunked variant: fn(chunk, lo, hi) once per contiguous range. Lets callers
/// keep per-chunk scratch state.
void parallel_chunks(index_t n, int jobs,
                     const std::function<void(int chunk, index_t lo, index_t hi)>& fn);

} // namespace hct
