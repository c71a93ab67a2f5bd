#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "hct/operators.hpp"
#include "test_util.hpp"

using namespace hct;
using namespace hct::testutil;

TEST_CASE("dyadic maximal of a constant is the constant") {
    RootSpec spec(2, 3);
    OperatorField m = dyadic_maximal(GridFunction::constant(spec, 0.9), 1.4);
    for (index_t c = 0; c < m.size(); ++c) CHECK(m[c] == doctest::Approx(0.9).epsilon(1e-12));
    OperatorField b = beta_maximal(GridFunction::constant(spec, 0.9), 1.4);
    for (index_t c = 0; c < b.size(); ++c) CHECK(b[c] == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("dyadic maximal of a single-cell indicator") {
    RootSpec spec(2, 3);
    CellSet e = CellSet::of(spec, std::vector<index_t>{0});
    OperatorField m = dyadic_maximal(GridFunction::indicator(e), 1.0);
    CHECK(m[0] == doctest::Approx(1.0));
    // sibling inside the same level-2 parent: average (1/8)/(1/4)
    CHECK(m[1] == doctest::Approx(0.5));
    CHECK(m[spec.cell_index(std::vector<index_t>{1, 1})] == doctest::Approx(0.5));
    // cell sharing only the root
    CHECK(m[spec.cell_count() - 1] == doctest::Approx(0.125));
}

TEST_CASE("weak (1,1) bound for the dyadic maximal has a finite constant") {
    RootSpec spec(2, 4);
    std::mt19937_64 gen(71);
    for (int trial = 0; trial < 10; ++trial) {
        const double beta = 0.5 + 1.5 * uniform01(gen);
        GridFunction f(spec, random_values(gen, spec.cell_count(), 5));
        OperatorField m = dyadic_maximal(f, beta);
        const double total = integral(f, beta);
        double worst = 0.0;
        for (double t : GridFunction(spec, m.values).distinct_values()) {
            if (t <= 0.0) continue;
            CellSet ge(spec);
            for (index_t c = 0; c < m.size(); ++c)
                if (m[c] >= t) ge.add(c);
            worst = std::max(worst, t * content(ge, {beta}) / total);
        }
        CHECK(worst < 50.0); // finite, reported empirically by the harness
    }
}

TEST_CASE("beta maximal dominates the dyadic maximal") {
    RootSpec spec(2, 3);
    std::mt19937_64 gen(73);
    GridFunction f(spec, random_values(gen, spec.cell_count(), 6));
    OperatorField dm = dyadic_maximal(f, 1.3);
    OperatorField bm = beta_maximal(f, 1.3);
    for (index_t c = 0; c < dm.size(); ++c) CHECK(bm[c] >= dm[c] - 1e-12);
}

TEST_CASE("beta maximal of a one-cell indicator matches a brute-force cube scan") {
    RootSpec spec(2, 4); // 16x16 grid
    const index_t hot = spec.cell_index(std::vector<index_t>{5, 9});
    CellSet e = CellSet::of(spec, std::vector<index_t>{hot});
    const double beta = 1.25;
    OperatorField bm = beta_maximal(GridFunction::indicator(e), beta);

    // independent: for every lattice cube Q containing both x and the hot
    // cell, the average is side(cell)^beta / side(Q)^beta; the field is the
    // max over cubes containing x (zero if no shared cube, impossible here
    // since the top cube holds everything)
    const double cell_cost = std::pow(spec.cell_side(), beta);
    std::vector<double> expect(static_cast<std::size_t>(spec.cell_count()), 0.0);
    for (const Lattice& lat : shifted_lattices(spec)) {
        for (int k = lat.top_level(); k <= lat.finest_level(); ++k) {
            const index_t hot_cube = lat.containing_flat(k, hot);
            REQUIRE(hot_cube >= 0);
            const double avg = cell_cost / std::pow(lat.side(k), beta);
            std::array<index_t, 2> jlo{}, jhi{};
            lat.cell_box(k, hot_cube, jlo, jhi);
            for (index_t x = jlo[0]; x <= jhi[0]; ++x)
                for (index_t y = jlo[1]; y <= jhi[1]; ++y) {
                    auto& slot = expect[static_cast<std::size_t>((x << spec.depth) | y)];
                    slot = std::max(slot, avg);
                }
        }
    }
    for (index_t c = 0; c < bm.size(); ++c)
        CHECK(bm[c] == doctest::Approx(expect[static_cast<std::size_t>(c)]).epsilon(1e-12));
}

TEST_CASE("best constant c") {
    RootSpec spec(2, 3);
    DyadicTree tree = build_root(spec);
    SUBCASE("constant function: c is the constant, value zero") {
        BestC best = best_constant_c(GridFunction::constant(spec, 0.4), tree.root(), 1.0);
        CHECK(best.c == doctest::Approx(0.4));
        CHECK(best.value == 0.0);
    }
    SUBCASE("two-valued function: exact policy matches a fine scan") {
        std::mt19937_64 gen(79);
        for (int trial = 0; trial < 8; ++trial) {
            CellSet e = random_cellset(gen, spec, 0.4);
            const double a = 1.0 + uniform01(gen), b = 0.3 * uniform01(gen);
            std::vector<double> v(static_cast<std::size_t>(spec.cell_count()), b);
            for (index_t c = 0; c < spec.cell_count(); ++c)
                if (e.contains(c)) v[static_cast<std::size_t>(c)] += a;
            GridFunction f(spec, std::move(v));
            BestC best = best_constant_c(f, tree.root(), 1.2, CPolicy::AllPairwiseMidpoints);
            // independent fine scan of the objective
            double scan_best = std::numeric_limits<double>::infinity();
            for (double c = b - 0.05; c <= a + b + 0.05; c += 1e-3) {
                std::vector<double> g(static_cast<std::size_t>(spec.cell_count()));
                for (index_t i = 0; i < spec.cell_count(); ++i)
                    g[static_cast<std::size_t>(i)] = std::abs(f[i] - c);
                scan_best = std::min(scan_best, integral(GridFunction(spec, std::move(g)), 1.2));
            }
            CHECK(best.value <= scan_best + 1e-9);
        }
    }
    SUBCASE("translation shifts c and keeps the value") {
        std::mt19937_64 gen(83);
        GridFunction f(spec, random_values(gen, spec.cell_count(), 4));
        std::vector<double> shifted(f.values().begin(), f.values().end());
        for (auto& v : shifted) v += 0.7;
        BestC a = best_constant_c(f, tree.root(), 1.0);
        BestC b = best_constant_c(GridFunction(spec, shifted), tree.root(), 1.0);
        CHECK(b.c == doctest::Approx(a.c + 0.7).epsilon(1e-12));
        CHECK(b.value == doctest::Approx(a.value).epsilon(1e-12));
    }
    SUBCASE("empty cube is rejected") {
        // a shifted boundary cube that covers no cell centers
        for (const Lattice& lat : shifted_lattices(spec)) {
            if (lat.shift_mask() == 0) continue;
            const auto& lv = lat.level(spec.depth);
            for (index_t fl = 0; fl < lv.count; ++fl) {
                if (lat.leaf_cell(fl) >= 0) continue;
                DyadicCube q = lat.cube(spec.depth, fl);
                CHECK_THROWS_AS(best_constant_c(GridFunction::constant(spec, 1.0), q, 1.0),
                                std::invalid_argument);
                return;
            }
        }
    }
}

TEST_CASE("sharp maximal fields") {
    RootSpec spec(2, 3);
    std::mt19937_64 gen(89);
    GridFunction f(spec, random_values(gen, spec.cell_count(), 4));

    SUBCASE("constants map to zero") {
        for (auto field : {dyadic_sharp_maximal(GridFunction::constant(spec, 2.0), 1.5),
                           sharp_maximal(GridFunction::constant(spec, 2.0), 1.5),
                           centered_sharp_maximal(GridFunction::constant(spec, 2.0), 1.5)}) {
            for (index_t c = 0; c < field.size(); ++c) CHECK(field[c] == 0.0);
        }
    }
    SUBCASE("shift and scale invariance") {
        OperatorField base = dyadic_sharp_maximal(f, 1.2);
        std::vector<double> shifted(f.values().begin(), f.values().end());
        for (auto& v : shifted) v += 1.3;
        OperatorField sh = dyadic_sharp_maximal(GridFunction(spec, shifted), 1.2);
        std::vector<double> scaled(f.values().begin(), f.values().end());
        for (auto& v : scaled) v *= 2.5;
        OperatorField sc = dyadic_sharp_maximal(GridFunction(spec, scaled), 1.2);
        for (index_t c = 0; c < base.size(); ++c) {
            CHECK(sh[c] == doctest::Approx(base[c]).epsilon(1e-12));
            CHECK(sc[c] == doctest::Approx(2.5 * base[c]).epsilon(1e-12));
        }
    }
    SUBCASE("sharp is dominated by twice the maximal") {
        OperatorField sharp = dyadic_sharp_maximal(f, 1.2, CPolicy::AllPairwiseMidpoints);
        OperatorField maximal = dyadic_maximal(f, 1.2);
        for (index_t c = 0; c < sharp.size(); ++c) CHECK(sharp[c] <= 2.0 * maximal[c] + 1e-12);
    }
    SUBCASE("centered is dominated by uncentered") {
        OperatorField cen = centered_sharp_maximal(f, 1.2);
        OperatorField unc = sharp_maximal(f, 1.2);
        for (index_t c = 0; c < cen.size(); ++c) CHECK(cen[c] <= unc[c] + 1e-12);
    }
    SUBCASE("domination by the beta maximal with a finite constant") {
        OperatorField sharp = dyadic_sharp_maximal(f, 1.2);
        OperatorField bm = beta_maximal(f, 1.2);
        for (index_t c = 0; c < sharp.size(); ++c)
            if (sharp[c] > 1e-12) CHECK(sharp[c] / bm[c] < 4.0);
    }
}

TEST_CASE("sharp maximal at beta = dim matches the classical reference") {
    RootSpec spec(2, 3);
    std::mt19937_64 gen(97);
    GridFunction f(spec, random_values(gen, spec.cell_count(), 5));
    OperatorField ours = dyadic_sharp_maximal(f, 2.0, CPolicy::AllPairwiseMidpoints);
    OperatorField ref = classical::dyadic_sharp_maximal(f);
    for (index_t c = 0; c < ours.size(); ++c)
        CHECK(ours[c] == doctest::Approx(ref[c]).epsilon(1e-8));
    OperatorField ours_m = dyadic_maximal(f, 2.0);
    OperatorField ref_m = classical::dyadic_maximal(f);
    for (index_t c = 0; c < ours_m.size(); ++c)
        CHECK(ours_m[c] == doctest::Approx(ref_m[c]).epsilon(1e-10));
    OperatorField ours_b = beta_maximal(f, 2.0);
    OperatorField ref_b = classical::beta_maximal(f);
    for (index_t c = 0; c < ours_b.size(); ++c)
        CHECK(ours_b[c] == doctest::Approx(ref_b[c]).epsilon(1e-10));
    OperatorField ours_s = sharp_maximal(f, 2.0, CPolicy::AllPairwiseMidpoints);
    OperatorField ref_s = classical::sharp_maximal(f);
    for (index_t c = 0; c < ours_s.size(); ++c)
        CHECK(ours_s[c] == doctest::Approx(ref_s[c]).epsilon(1e-8));
}

TEST_CASE("maximal operators are sublinear for the dyadic content") {
    RootSpec spec(2, 3);
    std::mt19937_64 gen(101);
    for (int trial = 0; trial < 10; ++trial) {
        GridFunction f(spec, random_values(gen, spec.cell_count(), 4));
        GridFunction g(spec, random_values(gen, spec.cell_count(), 4));
        std::vector<double> sum(f.values().begin(), f.values().end());
        for (index_t c = 0; c < g.size(); ++c) sum[static_cast<std::size_t>(c)] += g[c];
        OperatorField mf = dyadic_maximal(f, 1.4);
        OperatorField mg = dyadic_maximal(g, 1.4);
        OperatorField ms = dyadic_maximal(GridFunction(spec, std::move(sum)), 1.4);
        for (index_t c = 0; c < ms.size(); ++c) CHECK(ms[c] <= mf[c] + mg[c] + 1e-11);
    }
}

TEST_CASE("fractional maximal") {
    RootSpec spec(2, 4);
    SUBCASE("zero measure and homogeneity") {
        DiscreteMeasure zero(spec);
        OperatorField z = fractional_maximal(zero, 1.0);
        for (index_t c = 0; c < z.size(); ++c) CHECK(z[c] == 0.0);
        std::mt19937_64 gen(103);
        std::vector<double> masses(static_cast<std::size_t>(spec.cell_count()));
        for (auto& m : masses) m = uniform01(gen) < 0.2 ? uniform01(gen) : 0.0;
        DiscreteMeasure mu(spec, masses);
        OperatorField a = fractional_maximal(mu, 1.3);
        OperatorField b = fractional_maximal(mu.scaled(3.0), 1.3);
        for (index_t c = 0; c < a.size(); ++c)
            CHECK(b[c] == doctest::Approx(3.0 * a[c]).epsilon(1e-12));
    }
    SUBCASE("unit atom: field comparable to sup-distance^{alpha-d}") {
        DiscreteMeasure mu(spec);
        mu.add_atom({{0.03125, 0.03125}, 1.0}); // center of cell (0,0)
        const double alpha = 1.0;
        OperatorField field = fractional_maximal(mu, alpha);
        std::vector<index_t> cc(2);
        for (index_t c = 0; c < field.size(); ++c) {
            spec.cell_coords(c, cc);
            const double dx = std::max(std::abs(spec.cell_center(cc[0], 0) - 0.03125),
                                       std::abs(spec.cell_center(cc[1], 1) - 0.03125));
            if (dx < 1e-12) continue; // the atom cell itself
            const double ratio = field[c] * dx; // alpha - d = -1
            CHECK(ratio > 0.2);
            CHECK(ratio < 4.0);
        }
    }
    SUBCASE("alpha range enforced") {
        DiscreteMeasure mu(spec);
        CHECK_THROWS_AS(fractional_maximal(mu, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(fractional_maximal(mu, 2.0), std::invalid_argument);
    }
}

TEST_CASE("bmo norm") {
    RootSpec spec(2, 3);
    CellSet omega = CellSet::full(spec);
    SUBCASE("constants have zero norm") {
        CHECK(bmo_beta_norm(GridFunction::constant(spec, 3.0), omega, 1.5) == 0.0);
    }
    SUBCASE("norm dominates the dyadic root oscillation") {
        std::mt19937_64 gen(107);
        GridFunction u(spec, random_values(gen, spec.cell_count(), 4));
        DyadicTree tree = build_root(spec);
        BestC root_osc = best_constant_c(u, tree.root(), 1.5, CPolicy::AdjacentMidpoints);
        CHECK(bmo_beta_norm(u, omega, 1.5) >= root_osc.value - 1e-12);
    }
    SUBCASE("empty omega rejected") {
        CHECK_THROWS_AS(bmo_beta_norm(GridFunction::constant(spec, 1.0), CellSet(spec), 1.0),
                        std::invalid_argument);
    }
}

TEST_CASE("morrey norm") {
    RootSpec spec(2, 4);
    SUBCASE("Lebesgue cell masses at beta = dim") {
        std::vector<double> masses(static_cast<std::size_t>(spec.cell_count()), spec.cell_volume());
        MorreyNorm norm = morrey_norm(DiscreteMeasure(spec, masses), CellSet::full(spec), 2.0);
        // sup-ball of radius r holds at most (2r + h)^2 of mass: constant ~ 4
        CHECK(norm.value >= 1.0);
        CHECK(norm.value <= 5.0);
        CHECK_FALSE(norm.fine_scale_divergence);
    }
    SUBCASE("unit mass on a grid row") {
        std::vector<double> masses(static_cast<std::size_t>(spec.cell_count()), 0.0);
        const index_t row = 5;
        for (index_t y = 0; y < spec.cells_per_axis(); ++y)
            masses[static_cast<std::size_t>((row << spec.depth) | y)] =
                1.0 / static_cast<double>(spec.cells_per_axis());
        DiscreteMeasure mu(spec, masses);
        MorreyNorm at1 = morrey_norm(mu, CellSet::full(spec), 1.0);
        CHECK(at1.value < 8.0);
        CHECK_FALSE(at1.fine_scale_divergence);
        MorreyNorm at2 = morrey_norm(mu, CellSet::full(spec), 2.0);
        CHECK(at2.fine_scale_divergence);
        CHECK(at2.value > at1.value);
    }
    SUBCASE("empty omega rejected") {
        CHECK_THROWS_AS(morrey_norm(DiscreteMeasure(spec), CellSet(spec), 1.0),
                        std::invalid_argument);
    }
}

TEST_CASE("level-set comparability of the two maximal operators") {
    // content({beta_maximal > t}) <= C * content({dyadic_maximal > 2^{-(beta+d)} t})
    RootSpec spec(2, 4);
    std::mt19937_64 gen(109);
    double worst_c = 0.0;
    for (int trial = 0; trial < 8; ++trial) {
        const double beta = 0.75 + 1.0 * uniform01(gen);
        GridFunction f(spec, random_values(gen, spec.cell_count(), 4));
        OperatorField bm = beta_maximal(f, beta);
        OperatorField dm = dyadic_maximal(f, beta);
        const double scale = std::pow(2.0, -(beta + 2.0));
        for (double frac : {0.2, 0.5, 0.8}) {
            const double t = frac * bm.max_value();
            const double lhs = content(bm.superlevel(t), {beta});
            const double rhs = content(dm.superlevel(scale * t), {beta});
            if (lhs <= 0.0) continue;
            REQUIRE(rhs > 0.0);
            worst_c = std::max(worst_c, lhs / rhs);
        }
    }
    CHECK(worst_c > 0.0);
    CHECK(worst_c < 50.0); // finite empirical constant
}

TEST_CASE("sharp maximal chain constant is stable under one refinement") {
    // sharp_beta <= C * sharp_alpha with C finite and moving < 25%
    const double alpha = 1.0, beta = 1.5;
    double c_at[2] = {0.0, 0.0};
    for (int pass = 0; pass < 2; ++pass) {
        RootSpec spec(2, 4 + pass);
        // the same coarse-level function at both depths
        std::vector<double> v(static_cast<std::size_t>(spec.cell_count()));
        for (index_t c = 0; c < spec.cell_count(); ++c) {
            const index_t x = (c >> spec.depth) >> (spec.depth - 3);
            const index_t y = (c & (spec.cells_per_axis() - 1)) >> (spec.depth - 3);
            v[static_cast<std::size_t>(c)] = static_cast<double>((3 * x + 5 * y) % 7) / 7.0;
        }
        GridFunction f(spec, std::move(v));
        OperatorField sa = sharp_maximal(f, alpha);
        OperatorField sb = sharp_maximal(f, beta);
        double cmax = 0.0;
        for (index_t c = 0; c < f.size(); ++c) {
            if (sb[c] <= 1e-14) continue;
            REQUIRE(sa[c] > 1e-14);
            cmax = std::max(cmax, sb[c] / sa[c]);
        }
        c_at[pass] = cmax;
    }
    CHECK(c_at[0] > 0.0);
    CHECK(std::abs(c_at[1] - c_at[0]) / c_at[0] < 0.25);
}

TEST_CASE("operator fields are symmetric for symmetric inputs") {
    RootSpec spec(2, 3);
    // f(x, y) = f(y, x) by construction
    std::vector<double> v(static_cast<std::size_t>(spec.cell_count()));
    for (index_t x = 0; x < spec.cells_per_axis(); ++x)
        for (index_t y = 0; y < spec.cells_per_axis(); ++y)
            v[static_cast<std::size_t>((x << spec.depth) | y)] =
                static_cast<double>(std::min(x, y) + 1);
    GridFunction f(spec, std::move(v));
    for (const OperatorField& field :
         {dyadic_maximal(f, 1.3), beta_maximal(f, 1.3), dyadic_sharp_maximal(f, 1.3),
          sharp_maximal(f, 1.3), centered_sharp_maximal(f, 1.3)}) {
        for (index_t x = 0; x < spec.cells_per_axis(); ++x)
            for (index_t y = 0; y < spec.cells_per_axis(); ++y)
                CHECK(field[(x << spec.depth) | y] ==
                      doctest::Approx(field[(y << spec.depth) | x]).epsilon(1e-12));
    }
}
