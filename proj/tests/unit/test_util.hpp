#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "hct/grid.hpp"

namespace hct::testutil {

inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline hct::index_t uniform_below(std::mt19937_64& gen, hct::index_t n) {
    return static_cast<hct::index_t>(gen() % static_cast<std::uint64_t>(n));
}

inline hct::CellSet random_cellset(std::mt19937_64& gen, const hct::RootSpec& spec, double density) {
    hct::CellSet s(spec);
    for (hct::index_t c = 0; c < spec.cell_count(); ++c)
        if (uniform01(gen) < density) s.add(c);
    return s;
}

inline std::vector<double> random_values(std::mt19937_64& gen, hct::index_t n, int levels,
                                         double lo = 0.0, double hi = 1.0) {
    std::vector<double> reps(static_cast<std::size_t>(levels));
    for (auto& r : reps) r = lo + (hi - lo) * uniform01(gen);
    std::vector<double> v(static_cast<std::size_t>(n));
    for (auto& x : v) x = reps[static_cast<std::size_t>(uniform_below(gen, levels))];
    return v;
}

} // namespace hct::testutil
