#include <doctest.h>

#include <array>
#include <map>
#include <vector>

#include "hct/grid.hpp"

using namespace hct;

namespace {

// exact interval of a lattice cube along one axis, as numerator over 3*2^kmax
struct Extent {
    index_t lo, hi;
};

Extent axis_extent(const Lattice& lat, int k, index_t m, int axis, int kmax) {
    const index_t num = 3 * m + lat.shift_of(k, axis);
    const index_t scale = index_t(1) << (kmax - k);
    return {num * scale, (num + 3) * scale};
}

} // namespace

TEST_CASE("build_root cube counts") {
    CHECK(build_root({2, 3}).cube_count() == 85);
    CHECK(build_root({1, 0}).cube_count() == 1);
    CHECK(build_root({3, 2}).cube_count() == 73);
}

TEST_CASE("root spec validation") {
    CHECK_THROWS_AS(RootSpec(0, 3).validate(), std::invalid_argument);
    CHECK_THROWS_AS(RootSpec(2, -1).validate(), std::invalid_argument);
    CHECK_THROWS_AS(RootSpec(2, 3, -1.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(RootSpec(2, 14).validate(), CapacityError); // 2^28 cells
    CHECK_NOTHROW(RootSpec(2, 7).validate());
}

TEST_CASE("ancestor chains") {
    DyadicTree tree = build_root({2, 3});
    CHECK(tree.ancestors(tree.cell_cube(0)).size() == 4);
    CHECK(tree.ancestors(tree.root()).size() == 1);
    DyadicCube level1{1, 0, {1, 0}};
    auto chain = tree.ancestors(level1);
    REQUIRE(chain.size() == 2);
    CHECK(chain[0] == level1);
    CHECK(chain[1] == tree.root());
}

TEST_CASE("enumeration is level-major lexicographic and reproducible") {
    DyadicTree a = build_root({2, 2});
    DyadicTree b = build_root({2, 2});
    REQUIRE(a.cube_count() == 21);
    int last_level = -1;
    std::vector<index_t> last_index;
    for (index_t i = 0; i < a.cube_count(); ++i) {
        DyadicCube q = a.cube_at(i);
        CHECK(q == b.cube_at(i));
        CHECK(a.index_of(q) == i);
        if (q.level == last_level) CHECK(q.index > last_index);
        else CHECK(q.level == last_level + 1);
        last_level = q.level;
        last_index = q.index;
    }
}

TEST_CASE("children tile their parent") {
    DyadicTree tree = build_root({2, 3});
    for (index_t i = 0; i < tree.cube_count(); ++i) {
        DyadicCube q = tree.cube_at(i);
        auto kids = tree.children(q);
        if (q.level == 3) {
            CHECK(kids.empty());
            continue;
        }
        REQUIRE(kids.size() == 4);
        for (const auto& kid : kids) {
            auto chain = tree.ancestors(kid);
            REQUIRE(chain.size() >= 2);
            CHECK(chain[1] == q);
        }
    }
}

TEST_CASE("shifted lattice count and top cube") {
    CHECK(shifted_lattices({1, 2}).size() == 2);
    CHECK(shifted_lattices({2, 2}).size() == 4);
    for (const Lattice& lat : shifted_lattices({2, 3})) {
        // one coarse cube above the root covering every cell
        const auto& top = lat.level(lat.top_level());
        REQUIRE(top.count == 1);
        std::array<index_t, 2> jlo{}, jhi{};
        lat.cell_box(lat.top_level(), 0, jlo, jhi);
        CHECK(jlo == std::array<index_t, 2>{0, 0});
        CHECK(jhi == std::array<index_t, 2>{7, 7});
    }
}

TEST_CASE("every cell center lies in exactly one cube per level per lattice") {
    RootSpec spec{2, 3};
    for (const Lattice& lat : shifted_lattices(spec)) {
        for (int k = lat.top_level(); k <= lat.finest_level(); ++k) {
            std::vector<int> covered(static_cast<std::size_t>(spec.cell_count()), 0);
            const auto& lv = lat.level(k);
            std::array<index_t, 2> jlo{}, jhi{};
            for (index_t f = 0; f < lv.count; ++f) {
                lat.cell_box(k, f, jlo, jhi);
                for (index_t x = jlo[0]; x <= jhi[0]; ++x)
                    for (index_t y = jlo[1]; y <= jhi[1]; ++y)
                        covered[static_cast<std::size_t>((x << spec.depth) | y)] += 1;
            }
            for (index_t c = 0; c < spec.cell_count(); ++c)
                CHECK(covered[static_cast<std::size_t>(c)] == 1);
        }
    }
}

TEST_CASE("containing cube agrees with cell boxes") {
    RootSpec spec{2, 3};
    for (const Lattice& lat : shifted_lattices(spec)) {
        for (int k = lat.top_level(); k <= lat.finest_level(); ++k) {
            std::array<index_t, 2> jlo{}, jhi{};
            for (index_t c = 0; c < spec.cell_count(); ++c) {
                index_t f = lat.containing_flat(k, c);
                REQUIRE(f >= 0);
                lat.cell_box(k, f, jlo, jhi);
                std::array<index_t, 2> cc{};
                spec.cell_coords(c, cc);
                CHECK(jlo[0] <= cc[0]);
                CHECK(cc[0] <= jhi[0]);
                CHECK(jlo[1] <= cc[1]);
                CHECK(cc[1] <= jhi[1]);
            }
        }
    }
}

TEST_CASE("nesting: two cubes of one lattice are nested or disjoint") {
    RootSpec spec{2, 3};
    for (const Lattice& lat : shifted_lattices(spec)) {
        const int kmax = lat.finest_level();
        struct Cube {
            int k;
            std::array<Extent, 2> e;
        };
        std::vector<Cube> cubes;
        std::array<index_t, 2> m{};
        for (int k = lat.top_level(); k <= kmax; ++k) {
            const auto& lv = lat.level(k);
            for (index_t f = 0; f < lv.count; ++f) {
                lat.m_of(k, f, m);
                cubes.push_back({k, {axis_extent(lat, k, m[0], 0, kmax), axis_extent(lat, k, m[1], 1, kmax)}});
            }
        }
        for (std::size_t i = 0; i < cubes.size(); ++i)
            for (std::size_t j = i + 1; j < cubes.size(); ++j) {
                bool overlap = true, i_in_j = true, j_in_i = true;
                for (int a = 0; a < 2; ++a) {
                    const Extent& A = cubes[i].e[static_cast<std::size_t>(a)];
                    const Extent& B = cubes[j].e[static_cast<std::size_t>(a)];
                    if (A.lo >= B.hi || B.lo >= A.hi) overlap = false;
                    if (!(A.lo >= B.lo && A.hi <= B.hi)) i_in_j = false;
                    if (!(B.lo >= A.lo && B.hi <= A.hi)) j_in_i = false;
                }
                if (overlap) CHECK((i_in_j || j_in_i));
            }
    }
}

TEST_CASE("leaf bijection and parent/child coherence") {
    RootSpec spec{2, 3};
    for (const Lattice& lat : shifted_lattices(spec)) {
        for (index_t c = 0; c < spec.cell_count(); ++c) {
            const index_t leaf = lat.leaf_of_cell(c);
            CHECK(lat.leaf_cell(leaf) == c);
        }
        std::array<index_t, 4> kid{};
        for (int k = lat.top_level(); k < lat.finest_level(); ++k) {
            const auto& lv = lat.level(k);
            for (index_t f = 0; f < lv.count; ++f) {
                lat.children(k, f, kid);
                for (index_t ch : kid)
                    if (ch >= 0) CHECK(lat.parent_flat(k + 1, ch) == f);
            }
        }
    }
}

TEST_CASE("center cell lies inside its cube") {
    RootSpec spec{2, 4};
    for (const Lattice& lat : shifted_lattices(spec)) {
        std::array<index_t, 2> jlo{}, jhi{};
        for (int k = lat.top_level(); k <= lat.finest_level(); ++k) {
            const auto& lv = lat.level(k);
            for (index_t f = 0; f < lv.count; ++f) {
                const index_t c = lat.center_cell(k, f);
                if (c < 0) continue;
                CHECK(lat.containing_flat(k, c) == f);
                lat.cell_box(k, f, jlo, jhi);
                std::array<index_t, 2> cc{};
                spec.cell_coords(c, cc);
                CHECK(jlo[0] <= cc[0]);
                CHECK(cc[0] <= jhi[0]);
            }
        }
    }
}

TEST_CASE("cellset algebra") {
    RootSpec spec{2, 2};
    CellSet a = CellSet::of(spec, std::vector<index_t>{0, 3, 5});
    CellSet b = CellSet::of(spec, std::vector<index_t>{3, 7});
    CHECK(a.size() == 3);
    CHECK(a.united(b).size() == 4);
    CHECK(a.intersected(b).size() == 1);
    CHECK(a.complemented().size() == 13);
    CHECK(a.intersected(b).subset_of(a));
    CHECK(CellSet::full(spec).size() == 16);
    CHECK_THROWS_AS(a.add(16), std::out_of_range);
}
