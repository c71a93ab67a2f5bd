#include "hct/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace hct {

void RootSpec::validate() const {
    if (dim < 1) throw std::invalid_argument("RootSpec: dim must be >= 1");
    if (depth < 0) throw std::invalid_argument("RootSpec: depth must be >= 0");
    if (!(side > 0.0) || !std::isfinite(side))
        throw std::invalid_argument("RootSpec: side must be positive and finite");
    if (!origin.empty() && static_cast<int>(origin.size()) != dim)
        throw std::invalid_argument("RootSpec: origin size must match dim");
    for (double o : origin)
        if (!std::isfinite(o)) throw std::invalid_argument("RootSpec: origin must be finite");
    if (depth > 62 || dim * depth > 62)
        throw CapacityError("RootSpec: 2^(dim*depth) does not fit the index range");
    long double cells = std::pow(2.0L, static_cast<long double>(dim) * depth);
    if (cells > static_cast<long double>(kCellCap))
        throw CapacityError("RootSpec: cell count 2^(dim*depth) exceeds the cap of 2^24");
}

index_t RootSpec::cell_count() const {
    return index_t(1) << (static_cast<index_t>(dim) * depth);
}

double RootSpec::cell_side() const { return side * std::ldexp(1.0, -depth); }

double RootSpec::cell_volume() const { return std::pow(cell_side(), dim); }

index_t RootSpec::cell_index(std::span<const index_t> coords) const {
    index_t idx = 0;
    for (int a = 0; a < dim; ++a) idx = (idx << depth) | coords[static_cast<std::size_t>(a)];
    return idx;
}

void RootSpec::cell_coords(index_t index, std::span<index_t> out) const {
    const index_t mask = cells_per_axis() - 1;
    for (int a = dim - 1; a >= 0; --a) {
        out[static_cast<std::size_t>(a)] = index & mask;
        index >>= depth;
    }
}

double RootSpec::cell_center(index_t coord, int axis) const {
    return origin_at(axis) + side * std::ldexp(static_cast<double>(2 * coord + 1), -(depth + 1));
}

bool RootSpec::same_grid(const RootSpec& o) const {
    if (dim != o.dim || depth != o.depth || side != o.side) return false;
    for (int a = 0; a < dim; ++a)
        if (origin_at(a) != o.origin_at(a)) return false;
    return true;
}

std::string DyadicCube::to_string() const {
    std::ostringstream os;
    os << "Q(level=" << level << ", shift=" << shift << ", index=[";
    for (std::size_t a = 0; a < index.size(); ++a) os << (a ? "," : "") << index[a];
    os << "])";
    return os.str();
}

// ---------------------------------------------------------------------------
// CellSet

CellSet::CellSet(RootSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    bits_.assign(static_cast<std::size_t>((spec_.cell_count() + 63) / 64), 0);
}

CellSet CellSet::full(const RootSpec& spec) {
    CellSet s(spec);
    const index_t n = spec.cell_count();
    for (index_t w = 0; w < static_cast<index_t>(s.bits_.size()); ++w) s.bits_[static_cast<std::size_t>(w)] = ~std::uint64_t(0);
    const int tail = static_cast<int>(n & 63);
    if (tail != 0) s.bits_.back() = (std::uint64_t(1) << tail) - 1;
    return s;
}

CellSet CellSet::of(const RootSpec& spec, std::span<const index_t> cells) {
    CellSet s(spec);
    for (index_t c : cells) s.add(c);
    return s;
}

index_t CellSet::size() const {
    index_t n = 0;
    for (std::uint64_t w : bits_) n += std::popcount(w);
    return n;
}

void CellSet::add(index_t cell) {
    if (cell < 0 || cell >= spec_.cell_count())
        throw std::out_of_range("CellSet: cell index out of range");
    bits_[static_cast<std::size_t>(cell >> 6)] |= std::uint64_t(1) << (cell & 63);
}

void CellSet::remove(index_t cell) {
    if (cell < 0 || cell >= spec_.cell_count())
        throw std::out_of_range("CellSet: cell index out of range");
    bits_[static_cast<std::size_t>(cell >> 6)] &= ~(std::uint64_t(1) << (cell & 63));
}

std::vector<index_t> CellSet::members() const {
    std::vector<index_t> out;
    out.reserve(static_cast<std::size_t>(size()));
    for (index_t c = 0; c < spec_.cell_count(); ++c)
        if (contains(c)) out.push_back(c);
    return out;
}

static void require_same_grid(const RootSpec& a, const RootSpec& b) {
    if (!a.same_grid(b)) throw std::invalid_argument("CellSet: mismatched root grids");
}

CellSet CellSet::united(const CellSet& o) const {
    require_same_grid(spec_, o.spec_);
    CellSet r = *this;
    for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] |= o.bits_[i];
    return r;
}

CellSet CellSet::intersected(const CellSet& o) const {
    require_same_grid(spec_, o.spec_);
    CellSet r = *this;
    for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] &= o.bits_[i];
    return r;
}

CellSet CellSet::complemented() const {
    CellSet r = full(spec_);
    for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] &= ~bits_[i];
    return r;
}

bool CellSet::subset_of(const CellSet& o) const {
    require_same_grid(spec_, o.spec_);
    for (std::size_t i = 0; i < bits_.size(); ++i)
        if (bits_[i] & ~o.bits_[i]) return false;
    return true;
}

bool CellSet::operator==(const CellSet& o) const {
    return spec_.same_grid(o.spec_) && bits_ == o.bits_;
}

// ---------------------------------------------------------------------------
// Lattice

Lattice::Lattice(RootSpec spec, unsigned shift_mask, int top_level)
    : spec_(std::move(spec)), mask_(shift_mask), top_(top_level) {
    spec_.validate();
    if (top_ > 0) throw std::invalid_argument("Lattice: top level must be <= 0");
    if (mask_ >= (1u << spec_.dim)) throw std::invalid_argument("Lattice: bad shift mask");
    const int d = spec_.dim;
    levels_.reserve(static_cast<std::size_t>(level_count()));
    index_t offset = 0;
    for (int k = top_; k <= spec_.depth; ++k) {
        Level lv;
        lv.level = k;
        lv.lo.resize(static_cast<std::size_t>(d));
        lv.hi.resize(static_cast<std::size_t>(d));
        lv.stride.resize(static_cast<std::size_t>(d));
        const index_t p = index_t(1) << std::max(0, -k);
        const index_t q3 = 3 * (index_t(1) << std::max(0, k));
        for (int a = 0; a < d; ++a) {
            const index_t s = shift_of(k, a);
            lv.lo[static_cast<std::size_t>(a)] = floor_div(-3 - s, 3) + 1;
            lv.hi[static_cast<std::size_t>(a)] = floor_div(ceil_div(q3, p) - 1 - s, 3);
        }
        lv.count = 1;
        for (int a = d - 1; a >= 0; --a) {
            lv.stride[static_cast<std::size_t>(a)] = lv.count;
            lv.count *= lv.hi[static_cast<std::size_t>(a)] - lv.lo[static_cast<std::size_t>(a)] + 1;
        }
        lv.offset = offset;
        offset += lv.count;
        levels_.push_back(std::move(lv));
    }
    total_ = offset;
}

index_t Lattice::flat_of(int k, std::span<const index_t> m) const {
    const Level& lv = level(k);
    index_t flat = 0;
    for (int a = 0; a < dim(); ++a) {
        const auto ia = static_cast<std::size_t>(a);
        if (m[ia] < lv.lo[ia] || m[ia] > lv.hi[ia]) return -1;
        flat += (m[ia] - lv.lo[ia]) * lv.stride[ia];
    }
    return flat;
}

void Lattice::m_of(int k, index_t flat, std::span<index_t> m) const {
    const Level& lv = level(k);
    for (int a = 0; a < dim(); ++a) {
        const auto ia = static_cast<std::size_t>(a);
        m[ia] = lv.lo[ia] + flat / lv.stride[ia];
        flat %= lv.stride[ia];
    }
}

index_t Lattice::parent_flat(int k, index_t flat) const {
    if (k <= top_) return -1;
    const Level& lv = level(k);
    const Level& pv = level(k - 1);
    index_t out = 0;
    for (int a = 0; a < dim(); ++a) {
        const auto ia = static_cast<std::size_t>(a);
        const index_t m = lv.lo[ia] + flat / lv.stride[ia];
        flat %= lv.stride[ia];
        const index_t mp = floor_div(m - shift_of(k - 1, a), 2);
        if (mp < pv.lo[ia] || mp > pv.hi[ia]) return -1;
        out += (mp - pv.lo[ia]) * pv.stride[ia];
    }
    return out;
}

void Lattice::children(int k, index_t flat, std::span<index_t> out) const {
    const int d = dim();
    const unsigned n_children = 1u << d;
    if (k >= finest_level()) {
        for (unsigned c = 0; c < n_children; ++c) out[c] = -1;
        return;
    }
    const Level& lv = level(k);
    const Level& cv = level(k + 1);
    // per-axis flat contribution of child index {2m+s, 2m+s+1}, where in range
    std::array<index_t, 32> contrib0{}, contrib1{};
    unsigned valid0 = 0, valid1 = 0;
    for (int a = 0; a < d; ++a) {
        const auto ia = static_cast<std::size_t>(a);
        const index_t m = lv.lo[ia] + flat / lv.stride[ia];
        flat %= lv.stride[ia];
        const index_t c0 = 2 * m + shift_of(k, a);
        if (c0 >= cv.lo[ia] && c0 <= cv.hi[ia]) {
            valid0 |= 1u << a;
            contrib0[ia] = (c0 - cv.lo[ia]) * cv.stride[ia];
        }
        if (c0 + 1 >= cv.lo[ia] && c0 + 1 <= cv.hi[ia]) {
            valid1 |= 1u << a;
            contrib1[ia] = (c0 + 1 - cv.lo[ia]) * cv.stride[ia];
        }
    }
    for (unsigned c = 0; c < n_children; ++c) {
        index_t f = 0;
        bool ok = true;
        for (int a = 0; a < d; ++a) {
            const auto ia = static_cast<std::size_t>(a);
            const bool hi = (c >> (d - 1 - a)) & 1u;
            if (!((hi ? valid1 : valid0) & (1u << a))) { ok = false; break; }
            f += hi ? contrib1[ia] : contrib0[ia];
        }
        out[c] = ok ? f : -1;
    }
}

double Lattice::side(int k) const { return spec_.side * std::ldexp(1.0, -k); }

double Lattice::low_coord(int k, index_t m, int axis) const {
    const index_t s = shift_of(k, axis);
    return spec_.origin_at(axis) +
           spec_.side * static_cast<double>(3 * m + s) / (3.0 * std::ldexp(1.0, k));
}

index_t Lattice::leaf_cell(index_t leaf_flat) const {
    const int n = finest_level();
    const Level& lv = level(n);
    const index_t per = spec_.cells_per_axis();
    index_t cell = 0;
    for (int a = 0; a < dim(); ++a) {
        const auto ia = static_cast<std::size_t>(a);
        const index_t m = lv.lo[ia] + leaf_flat / lv.stride[ia];
        leaf_flat %= lv.stride[ia];
        if (m < 0 || m >= per) return -1;
        cell = (cell << spec_.depth) | m;
    }
    return cell;
}

index_t Lattice::leaf_of_cell(index_t cell) const {
    const Level& lv = level(finest_level());
    const index_t mask = spec_.cells_per_axis() - 1;
    index_t flat = 0;
    for (int a = dim() - 1; a >= 0; --a) {
        const auto ia = static_cast<std::size_t>(a);
        const index_t j = cell & mask;
        cell >>= spec_.depth;
        flat += (j - lv.lo[ia]) * lv.stride[ia];
    }
    return flat;
}

index_t Lattice::containing_flat(int k, index_t cell) const {
    const Level& lv = level(k);
    const index_t P = index_t(1) << (spec_.depth + 1 - k);
    const index_t mask = spec_.cells_per_axis() - 1;
    std::array<index_t, 32> j{};
    for (int a = dim() - 1; a >= 0; --a) {
        j[static_cast<std::size_t>(a)] = cell & mask;
        cell >>= spec_.depth;
    }
    index_t flat = 0;
    for (int a = 0; a < dim(); ++a) {
        const auto ia = static_cast<std::size_t>(a);
        const index_t s = shift_of(k, a);
        const index_t m = floor_div(3 * (2 * j[ia] + 1) - s * P, 3 * P);
        if (m < lv.lo[ia] || m > lv.hi[ia]) return -1;
        flat += (m - lv.lo[ia]) * lv.stride[ia];
    }
    return flat;
}

void Lattice::cell_box(int k, index_t flat, std::span<index_t> jlo, std::span<index_t> jhi) const {
    const Level& lv = level(k);
    const index_t P = index_t(1) << (spec_.depth + 1 - k);
    const index_t per = spec_.cells_per_axis();
    for (int a = 0; a < dim(); ++a) {
        const auto ia = static_cast<std::size_t>(a);
        const index_t m = lv.lo[ia] + flat / lv.stride[ia];
        flat %= lv.stride[ia];
        const index_t A = (3 * m + shift_of(k, a)) * P;
        jlo[ia] = std::max<index_t>(0, ceil_div(A - 3, 6));
        jhi[ia] = std::min<index_t>(per - 1, ceil_div(A + 3 * P - 3, 6) - 1);
    }
}

index_t Lattice::center_cell(int k, index_t flat) const {
    const Level& lv = level(k);
    const index_t P = index_t(1) << (spec_.depth + 1 - k);
    const index_t half = index_t(3) << (spec_.depth - k);
    const index_t per = spec_.cells_per_axis();
    index_t cell = 0;
    for (int a = 0; a < dim(); ++a) {
        const auto ia = static_cast<std::size_t>(a);
        const index_t m = lv.lo[ia] + flat / lv.stride[ia];
        flat %= lv.stride[ia];
        const index_t j = floor_div((3 * m + shift_of(k, a)) * P + half, 6);
        if (j < 0 || j >= per) return -1;
        cell = (cell << spec_.depth) | j;
    }
    return cell;
}

DyadicCube Lattice::cube(int k, index_t flat) const {
    DyadicCube q;
    q.level = k;
    q.shift = mask_;
    q.index.resize(static_cast<std::size_t>(dim()));
    m_of(k, flat, q.index);
    return q;
}

index_t Lattice::flat_of_cube(const DyadicCube& q) const {
    if (q.shift != mask_) throw std::invalid_argument("Lattice: cube from a different lattice");
    if (q.level < top_ || q.level > finest_level())
        throw std::invalid_argument("Lattice: cube level outside lattice range");
    const index_t f = flat_of(q.level, q.index);
    if (f < 0) throw std::invalid_argument("Lattice: cube does not intersect the root");
    return f;
}

// ---------------------------------------------------------------------------
// DyadicTree

DyadicTree::DyadicTree(RootSpec spec) : lattice_(std::move(spec), 0u, 0) {}

DyadicCube DyadicTree::cube_at(index_t enumeration_index) const {
    for (int k = 0; k <= lattice_.finest_level(); ++k) {
        const auto& lv = lattice_.level(k);
        if (enumeration_index < lv.count) return lattice_.cube(k, enumeration_index);
        enumeration_index -= lv.count;
    }
    throw std::out_of_range("DyadicTree: enumeration index out of range");
}

index_t DyadicTree::index_of(const DyadicCube& q) const {
    return lattice_.global_id(q.level, lattice_.flat_of_cube(q));
}

DyadicCube DyadicTree::cell_cube(index_t cell) const {
    return lattice_.cube(lattice_.finest_level(), lattice_.leaf_of_cell(cell));
}

std::vector<DyadicCube> DyadicTree::ancestors(const DyadicCube& q) const {
    std::vector<DyadicCube> chain;
    chain.reserve(static_cast<std::size_t>(q.level + 1));
    index_t flat = lattice_.flat_of_cube(q);
    for (int k = q.level; k >= 0; --k) {
        chain.push_back(lattice_.cube(k, flat));
        if (k > 0) flat = lattice_.parent_flat(k, flat);
    }
    return chain;
}

std::vector<DyadicCube> DyadicTree::children(const DyadicCube& q) const {
    std::vector<DyadicCube> out;
    if (q.level >= lattice_.finest_level()) return out;
    std::vector<index_t> kid(static_cast<std::size_t>(1) << lattice_.dim());
    lattice_.children(q.level, lattice_.flat_of_cube(q), kid);
    for (index_t f : kid)
        if (f >= 0) out.push_back(lattice_.cube(q.level + 1, f));
    return out;
}

DyadicTree build_root(const RootSpec& spec) { return DyadicTree(spec); }

std::vector<Lattice> shifted_lattices(const RootSpec& spec, int depth_margin) {
    if (depth_margin < 0) throw std::invalid_argument("shifted_lattices: depth_margin must be >= 0");
    std::vector<Lattice> out;
    out.reserve(std::size_t(1) << spec.dim);
    for (unsigned mask = 0; mask < (1u << spec.dim); ++mask)
        out.emplace_back(spec, mask, -depth_margin);
    return out;
}

} // namespace hct
