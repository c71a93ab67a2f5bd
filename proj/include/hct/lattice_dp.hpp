#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hct/grid.hpp"

namespace hct {

/// Per-level cover costs side(k)^beta for one lattice, level-major order.
std::vector<double> level_costs(const Lattice& lat, double beta);

/// Exact min-cover dynamic program over one lattice. For every lattice cube Q
/// (level-major layout, lat.cube_count() entries) computes the infimum of
/// sum side(Q_i)^beta over covers of E ∩ Q by lattice cubes:
///   leaf:     cost * [cell in E]
///   interior: min(cost(Q), sum over children) when E ∩ Q nonempty, else 0.
void lattice_content_dp(const Lattice& lat, std::span<const std::uint64_t> member_words,
                        double beta, std::span<double> out);

/// Min-cover value of E over the whole lattice (sum over top-level cubes).
double lattice_content_value(const Lattice& lat, std::span<const std::uint64_t> member_words,
                             double beta);

/// The full 2^dim-ary subtree hanging off one lattice cube, in Morton layout:
/// node z at relative level j has children (z << dim) | t. Leaves map to the
/// base cells covered by the cube (-1 where the ideal leaf falls outside the
/// root). Built once per cube, then reused across many small DP passes.
struct SubtreeView {
    int dim = 0;
    int rel_levels = 1;              // levels including the cube itself
    int cube_level = 0;              // absolute level of the subtree root
    std::vector<index_t> leaf_cell;  // Morton order, 2^{dim*(rel_levels-1)} entries

    static SubtreeView of(const Lattice& lat, int k, index_t flat);
    index_t leaf_count() const { return static_cast<index_t>(leaf_cell.size()); }
};

/// Scratch space for subtree DPs (one per worker thread).
struct SubtreeScratch {
    std::vector<double> node_value;
    std::vector<double> thresholds;
    std::vector<unsigned char> keep;
};

/// Min-cover cost at the subtree root of {leaves with keep[z] != 0}.
/// lvl_cost[j] is the cover cost at relative level j.
double subtree_content(const SubtreeView& view, std::span<const unsigned char> keep,
                       std::span<const double> lvl_cost, SubtreeScratch& scratch);

/// Layer-cake integral of the nonnegative leaf function g over the subtree
/// root, with respect to the subtree min-cover content:
///   sum_j (t_j - t_{j-1}) * content({g > t_{j-1}}), t_0 = 0,
/// over the sorted distinct positive values of g. Entries at absent leaves
/// (leaf_cell < 0) are ignored.
double subtree_layer_cake(const SubtreeView& view, std::span<const double> g,
                          std::span<const double> lvl_cost, SubtreeScratch& scratch);

} // namespace hct
