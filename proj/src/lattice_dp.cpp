#include "hct/lattice_dp.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace hct {

std::vector<double> level_costs(const Lattice& lat, double beta) {
    std::vector<double> c(static_cast<std::size_t>(lat.level_count()));
    for (int k = lat.top_level(); k <= lat.finest_level(); ++k)
        c[static_cast<std::size_t>(k - lat.top_level())] = std::pow(lat.side(k), beta);
    return c;
}

static inline bool member(std::span<const std::uint64_t> words, index_t cell) {
    return (words[static_cast<std::size_t>(cell >> 6)] >> (cell & 63)) & 1u;
}

void lattice_content_dp(const Lattice& lat, std::span<const std::uint64_t> member_words,
                        double beta, std::span<double> out) {
    const int d = lat.dim();
    const int n = lat.finest_level();
    const auto cost = level_costs(lat, beta);
    const auto cost_at = [&](int k) { return cost[static_cast<std::size_t>(k - lat.top_level())]; };

    const Lattice::Level& leaf = lat.level(n);
    double* leaf_out = out.data() + leaf.offset;
    for (index_t f = 0; f < leaf.count; ++f) {
        const index_t cell = lat.leaf_cell(f);
        leaf_out[f] = (cell >= 0 && member(member_words, cell)) ? cost_at(n) : 0.0;
    }

    std::array<index_t, 64> kid{};
    for (int k = n - 1; k >= lat.top_level(); --k) {
        const Lattice::Level& lv = lat.level(k);
        const Lattice::Level& cv = lat.level(k + 1);
        double* lvl_out = out.data() + lv.offset;
        const double* child_out = out.data() + cv.offset;
        const double own = cost_at(k);
        const unsigned nc = 1u << d;
        for (index_t f = 0; f < lv.count; ++f) {
            lat.children(k, f, std::span<index_t>(kid.data(), nc));
            double sum = 0.0;
            for (unsigned c = 0; c < nc; ++c)
                if (kid[c] >= 0) sum += child_out[kid[c]];
            lvl_out[f] = sum > 0.0 ? std::min(own, sum) : 0.0;
        }
    }
}

double lattice_content_value(const Lattice& lat, std::span<const std::uint64_t> member_words,
                             double beta) {
    std::vector<double> buf(static_cast<std::size_t>(lat.cube_count()));
    lattice_content_dp(lat, member_words, beta, buf);
    const Lattice::Level& top = lat.level(lat.top_level());
    double v = 0.0;
    for (index_t f = 0; f < top.count; ++f) v += buf[static_cast<std::size_t>(top.offset + f)];
    return v;
}

SubtreeView SubtreeView::of(const Lattice& lat, int k, index_t flat) {
    SubtreeView v;
    const int d = lat.dim();
    const int n = lat.finest_level();
    v.dim = d;
    v.cube_level = k;
    v.rel_levels = n - k + 1;
    const int h = v.rel_levels - 1;

    // ideal leaf box low corner: repeatedly take the delta=0 child index
    std::array<index_t, 32> lo{};
    {
        std::array<index_t, 32> m{};
        lat.m_of(k, flat, std::span<index_t>(m.data(), static_cast<std::size_t>(d)));
        for (int a = 0; a < d; ++a) lo[static_cast<std::size_t>(a)] = m[static_cast<std::size_t>(a)];
        for (int kk = k; kk < n; ++kk)
            for (int a = 0; a < d; ++a)
                lo[static_cast<std::size_t>(a)] = 2 * lo[static_cast<std::size_t>(a)] + lat.shift_of(kk, a);
    }

    const index_t per = lat.spec().cells_per_axis();
    const index_t leaves = index_t(1) << (static_cast<index_t>(d) * h);
    v.leaf_cell.resize(static_cast<std::size_t>(leaves));
    std::array<index_t, 32> rel{};
    for (index_t z = 0; z < leaves; ++z) {
        // de-interleave Morton bits into relative coords
        for (int a = 0; a < d; ++a) rel[static_cast<std::size_t>(a)] = 0;
        for (int b = 0; b < h; ++b)
            for (int a = 0; a < d; ++a) {
                const int pos = (h - 1 - b) * d + (d - 1 - a);
                rel[static_cast<std::size_t>(a)] |= ((z >> pos) & 1) << (h - 1 - b);
            }
        index_t cell = 0;
        bool ok = true;
        for (int a = 0; a < d; ++a) {
            const index_t j = lo[static_cast<std::size_t>(a)] + rel[static_cast<std::size_t>(a)];
            if (j < 0 || j >= per) { ok = false; break; }
            cell = (cell << lat.spec().depth) | j;
        }
        v.leaf_cell[static_cast<std::size_t>(z)] = ok ? cell : -1;
    }
    return v;
}

// Bottom-up over the Morton tree; nodes of relative level j occupy a prefix
// array of size 2^{dim*j}. Returns the root value.
static double subtree_dp(const SubtreeView& view, std::span<const unsigned char> keep,
                         std::span<const double> lvl_cost, SubtreeScratch& scratch) {
    const int d = view.dim;
    const int h = view.rel_levels - 1;
    const index_t leaves = view.leaf_count();
    auto& val = scratch.node_value;
    if (static_cast<index_t>(val.size()) < leaves) val.resize(static_cast<std::size_t>(leaves));

    for (index_t z = 0; z < leaves; ++z)
        val[static_cast<std::size_t>(z)] = keep[static_cast<std::size_t>(z)] ? lvl_cost[static_cast<std::size_t>(h)] : 0.0;
    index_t width = leaves;
    for (int j = h - 1; j >= 0; --j) {
        width >>= d;
        const double own = lvl_cost[static_cast<std::size_t>(j)];
        const unsigned nc = 1u << d;
        for (index_t z = 0; z < width; ++z) {
            double sum = 0.0;
            for (unsigned t = 0; t < nc; ++t) sum += val[static_cast<std::size_t>((z << d) | t)];
            val[static_cast<std::size_t>(z)] = sum > 0.0 ? std::min(own, sum) : 0.0;
        }
    }
    return val[0];
}

double subtree_content(const SubtreeView& view, std::span<const unsigned char> keep,
                       std::span<const double> lvl_cost, SubtreeScratch& scratch) {
    return subtree_dp(view, keep, lvl_cost, scratch);
}

double subtree_layer_cake(const SubtreeView& view, std::span<const double> g,
                          std::span<const double> lvl_cost, SubtreeScratch& scratch) {
    const index_t leaves = view.leaf_count();
    auto& ts = scratch.thresholds;
    ts.clear();
    for (index_t z = 0; z < leaves; ++z)
        if (view.leaf_cell[static_cast<std::size_t>(z)] >= 0 && g[static_cast<std::size_t>(z)] > 0.0)
            ts.push_back(g[static_cast<std::size_t>(z)]);
    if (ts.empty()) return 0.0;
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

    auto& keep = scratch.keep;
    if (static_cast<index_t>(keep.size()) < leaves) keep.resize(static_cast<std::size_t>(leaves));
    double total = 0.0;
    double prev = 0.0;
    for (double t : ts) {
        for (index_t z = 0; z < leaves; ++z)
            keep[static_cast<std::size_t>(z)] =
                view.leaf_cell[static_cast<std::size_t>(z)] >= 0 && g[static_cast<std::size_t>(z)] > prev;
        total += (t - prev) * subtree_dp(view, keep, lvl_cost, scratch);
        prev = t;
    }
    return total;
}

} // namespace hct
