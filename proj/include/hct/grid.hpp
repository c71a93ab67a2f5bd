#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hct/errors.hpp"

namespace hct {

using index_t = std::int64_t;

// Integer division rounding toward -inf / +inf. b must be positive.
constexpr index_t floor_div(index_t a, index_t b) {
    index_t q = a / b, r = a % b;
    return (r != 0 && r < 0) ? q - 1 : q;
}
constexpr index_t ceil_div(index_t a, index_t b) {
    index_t q = a / b, r = a % b;
    return (r != 0 && r > 0) ? q + 1 : q;
}

/// The root cube [origin, origin + side)^dim together with the finest dyadic
/// resolution. Finest cells have side `side * 2^-depth`; there are 2^(dim*depth)
/// of them, flat-indexed row-major with axis 0 most significant.
struct RootSpec {
    int dim = 2;
    int depth = 4;
    double side = 1.0;
    std::vector<double> origin; // empty means all zeros

    RootSpec() = default;
    RootSpec(int d, int n, double s = 1.0, std::vector<double> o = {})
        : dim(d), depth(n), side(s), origin(std::move(o)) {}

    static constexpr index_t kCellCap = index_t(1) << 24;

    void validate() const;
    index_t cells_per_axis() const { return index_t(1) << depth; }
    index_t cell_count() const;
    double cell_side() const;
    double cell_volume() const;
    double origin_at(int axis) const { return origin.empty() ? 0.0 : origin[axis]; }

    index_t cell_index(std::span<const index_t> coords) const;
    void cell_coords(index_t index, std::span<index_t> out) const;
    /// Center coordinate of a cell along one axis, from its per-axis integer coord.
    double cell_center(index_t coord, int axis) const;

    bool same_grid(const RootSpec& other) const;
};

/// One cube of a (possibly one-third-shifted) dyadic lattice. `level` counts
/// halvings of the root side (negative levels are cubes larger than the root);
/// `index` is the per-axis lattice index; `shift` is a bitmask with bit a set
/// when axis a carries the one-third shift.
struct DyadicCube {
    int level = 0;
    unsigned shift = 0;
    std::vector<index_t> index;

    bool operator==(const DyadicCube&) const = default;
    std::string to_string() const;
};

/// Subset of the finest-level cells of a root cube, bitmap semantics.
class CellSet {
public:
    explicit CellSet(RootSpec spec);
    static CellSet empty(const RootSpec& spec) { return CellSet(spec); }
    static CellSet full(const RootSpec& spec);
    static CellSet of(const RootSpec& spec, std::span<const index_t> cells);

    const RootSpec& spec() const { return spec_; }
    index_t size() const;
    bool is_empty() const { return size() == 0; }
    bool contains(index_t cell) const {
        return (bits_[static_cast<std::size_t>(cell >> 6)] >> (cell & 63)) & 1u;
    }
    void add(index_t cell);
    void remove(index_t cell);
    std::vector<index_t> members() const;
    std::span<const std::uint64_t> words() const { return bits_; }

    CellSet united(const CellSet& other) const;
    CellSet intersected(const CellSet& other) const;
    CellSet complemented() const;
    bool subset_of(const CellSet& other) const;
    bool operator==(const CellSet& other) const;

private:
    RootSpec spec_;
    std::vector<std::uint64_t> bits_;
};

/// One dyadic lattice D^i clipped to the cubes that intersect the root cube.
///
/// A cube of the lattice with shift indicator e in {0,1}^dim at level k has,
/// along axis a, the half-open extent
///     origin + side * [ (3*m + s*e_a) / (3*2^k) , (3*m + s*e_a + 3) / (3*2^k) )
/// with s = +1 for even k and -1 for odd k. The alternating sign makes every
/// cube the disjoint union of its 2^dim children, so each lattice is a genuine
/// tree. All containment tests are exact integer arithmetic on the scaled
/// numerators; no floating point enters the geometry.
///
/// Base finest cells are attached to the unique lattice cube containing their
/// center, so every lattice cube owns an axis-aligned box of cells and the
/// finest lattice level is in bijection with the cells it covers.
class Lattice {
public:
    struct Level {
        int level = 0;
        std::vector<index_t> lo, hi;     // inclusive per-axis index range
        std::vector<index_t> stride;     // row-major strides over the range
        index_t count = 0;
        index_t offset = 0;              // start of this level in level-major arrays
    };

    Lattice(RootSpec spec, unsigned shift_mask, int top_level);

    const RootSpec& spec() const { return spec_; }
    int dim() const { return spec_.dim; }
    int finest_level() const { return spec_.depth; }
    int top_level() const { return top_; }
    unsigned shift_mask() const { return mask_; }
    int level_count() const { return finest_level() - top_ + 1; }
    const Level& level(int k) const { return levels_[static_cast<std::size_t>(k - top_)]; }
    index_t cube_count() const { return total_; }

    int sign_at(int k) const { return (k & 1) ? -1 : +1; }
    int shift_of(int k, int axis) const {
        return ((mask_ >> axis) & 1u) ? sign_at(k) : 0;
    }

    index_t flat_of(int k, std::span<const index_t> m) const;
    void m_of(int k, index_t flat, std::span<index_t> m) const;
    index_t global_id(int k, index_t flat) const { return level(k).offset + flat; }

    /// Parent cube at level k-1, or -1 when k is the top level.
    index_t parent_flat(int k, index_t flat) const;
    /// The 2^dim children at level k+1 in lexicographic offset order; entries
    /// are -1 where the child does not intersect the root cube.
    void children(int k, index_t flat, std::span<index_t> out) const;

    /// Finest-level cube -> the cell it covers, or -1 when outside the root.
    index_t leaf_cell(index_t leaf_flat) const;
    index_t leaf_of_cell(index_t cell) const;
    /// Cube of level k whose interior holds the cell center.
    index_t containing_flat(int k, index_t cell) const;
    /// Box of cells whose centers lie in the cube, clipped to the root
    /// (empty when jlo > jhi on some axis). Requires k <= finest level.
    void cell_box(int k, index_t flat, std::span<index_t> jlo, std::span<index_t> jhi) const;
    /// Cell containing the cube center, or -1 when the center is outside the root.
    index_t center_cell(int k, index_t flat) const;

    double side(int k) const;
    double low_coord(int k, index_t m, int axis) const;

    DyadicCube cube(int k, index_t flat) const;
    index_t flat_of_cube(const DyadicCube& q) const;

private:
    RootSpec spec_;
    unsigned mask_ = 0;
    int top_ = 0;
    index_t total_ = 0;
    std::vector<Level> levels_;
};

/// The full base dyadic tree D(Q0), levels 0..depth, with deterministic
/// level-major lexicographic enumeration.
class DyadicTree {
public:
    explicit DyadicTree(RootSpec spec);

    const RootSpec& spec() const { return lattice_.spec(); }
    const Lattice& lattice() const { return lattice_; }
    index_t cube_count() const { return lattice_.cube_count(); }

    DyadicCube root() const { return lattice_.cube(0, 0); }
    DyadicCube cube_at(index_t enumeration_index) const;
    index_t index_of(const DyadicCube& q) const;
    DyadicCube cell_cube(index_t cell) const;

    /// Chain cube, parent, ..., root (depth+1 cubes for a finest cell).
    std::vector<DyadicCube> ancestors(const DyadicCube& q) const;
    std::vector<DyadicCube> children(const DyadicCube& q) const;

private:
    Lattice lattice_;
};

DyadicTree build_root(const RootSpec& spec);

/// The 2^dim one-third-shifted lattices, each with `depth_margin` extra coarse
/// levels above the root so a single lattice cube contains the whole root cube.
std::vector<Lattice> shifted_lattices(const RootSpec& spec, int depth_margin = 1);

} // namespace hct
