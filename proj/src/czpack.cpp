#include "hct/czpack.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <stdexcept>

#include "hct/errors.hpp"
#include "hct/lattice_dp.hpp"

namespace hct {

namespace {

constexpr double kRelTol = 1e-12;

bool leq(double a, double b) { return a <= b + kRelTol * std::max({std::abs(a), std::abs(b), 1.0}); }

void box_of(const Lattice& lat, int k, index_t flat, std::array<index_t, 32>& jlo,
            std::array<index_t, 32>& jhi) {
    const int d = lat.dim();
    lat.cell_box(k, flat, std::span<index_t>(jlo.data(), static_cast<std::size_t>(d)),
                 std::span<index_t>(jhi.data(), static_cast<std::size_t>(d)));
}

template <typename Fn>
void for_each_box_cell(const RootSpec& spec, const std::array<index_t, 32>& jlo,
                       const std::array<index_t, 32>& jhi, Fn&& fn) {
    const int d = spec.dim;
    for (int a = 0; a < d; ++a)
        if (jlo[static_cast<std::size_t>(a)] > jhi[static_cast<std::size_t>(a)]) return;
    std::array<index_t, 32> j = jlo;
    while (true) {
        index_t cell = 0;
        for (int a = 0; a < d; ++a) cell = (cell << spec.depth) | j[static_cast<std::size_t>(a)];
        fn(cell);
        int axis = d - 1;
        while (axis >= 0 && ++j[static_cast<std::size_t>(axis)] > jhi[static_cast<std::size_t>(axis)]) {
            j[static_cast<std::size_t>(axis)] = jlo[static_cast<std::size_t>(axis)];
            --axis;
        }
        if (axis < 0) break;
    }
}

} // namespace

CZDecomposition cz_decompose(const GridFunction& f, double beta, double lambda) {
    ContentParams{beta}.validate(f.spec().dim);
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("cz_decompose: lambda must be positive and finite");
    const RootSpec& spec = f.spec();
    const Lattice base(spec, 0u, 0);
    const std::vector<double> integrals = lattice_cube_integrals(base, f, beta);

    std::vector<double> avg(integrals.size());
    for (int k = 0; k <= spec.depth; ++k) {
        const auto& lv = base.level(k);
        const double inv = 1.0 / std::pow(base.side(k), beta);
        for (index_t fl = 0; fl < lv.count; ++fl)
            avg[static_cast<std::size_t>(lv.offset + fl)] = integrals[static_cast<std::size_t>(lv.offset + fl)] * inv;
    }
    if (lambda < avg[0])
        throw RootSaturatedError("cz_decompose: lambda below the root average; "
                                 "the decomposition has no parent cube to certify against");

    CZDecomposition out;
    out.lambda = lambda;
    out.beta = beta;

    // family = {avg > lambda}; keep its maximal cubes (no strict ancestor in
    // the family), walking top-down with an ancestor flag
    std::vector<unsigned char> covered(avg.size(), 0);
    for (int k = 0; k <= spec.depth; ++k) {
        const auto& lv = base.level(k);
        for (index_t fl = 0; fl < lv.count; ++fl) {
            const std::size_t id = static_cast<std::size_t>(lv.offset + fl);
            bool anc = false;
            if (k > 0) {
                const index_t p = base.parent_flat(k, fl);
                anc = covered[static_cast<std::size_t>(base.level(k - 1).offset + p)] != 0;
            }
            if (anc) {
                covered[id] = 1;
                continue;
            }
            if (avg[id] > lambda) {
                covered[id] = 1;
                out.cubes.push_back(base.cube(k, fl));
                out.averages.push_back(avg[id]);
            }
        }
    }

    // certificate
    const OperatorField field = dyadic_maximal(f, beta);
    CellSet level_set = field.superlevel(lambda);
    CellSet cube_union(spec);
    std::array<index_t, 32> jlo{}, jhi{};
    for (const DyadicCube& q : out.cubes) {
        const index_t fl = base.flat_of_cube(q);
        box_of(base, q.level, fl, jlo, jhi);
        for_each_box_cell(spec, jlo, jhi, [&](index_t cell) { cube_union.add(cell); });
    }
    out.certificate.union_matches = cube_union == level_set;

    // an ancestor escapes the level set when some of its cells has field value
    // at (or within rounding of) lambda; a genuinely contained ancestor would
    // contradict maximality
    out.certificate.maximality = true;
    for (const DyadicCube& q : out.cubes) {
        index_t fl = base.flat_of_cube(q);
        for (int k = q.level; k > 0; --k) {
            fl = base.parent_flat(k, fl);
            box_of(base, k - 1, fl, jlo, jhi);
            bool escapes = false;
            for_each_box_cell(spec, jlo, jhi, [&](index_t cell) {
                if (leq(field[cell], lambda)) escapes = true;
            });
            if (!escapes) out.certificate.maximality = false;
        }
    }

    const double upper = std::pow(2.0, beta) * lambda;
    out.certificate.average_bounds = true;
    for (double a : out.averages)
        if (!(a > lambda) || !leq(a, upper)) out.certificate.average_bounds = false;

    out.certificate.outside_bound = true;
    for (index_t c = 0; c < spec.cell_count(); ++c)
        if (!cube_union.contains(c) && !leq(f[c], lambda)) out.certificate.outside_bound = false;

    return out;
}

// ---------------------------------------------------------------------------
// packing selection

PackingSelection packing_select(const RootSpec& spec, const std::vector<DyadicCube>& family,
                                double beta) {
    ContentParams{beta}.validate(spec.dim);
    if (family.empty()) throw std::invalid_argument("packing_select: empty family");
    const unsigned shift = family.front().shift;
    int min_level = family.front().level;
    for (const DyadicCube& q : family) {
        if (q.shift != shift)
            throw std::invalid_argument("packing_select: family spans multiple lattices");
        min_level = std::min(min_level, q.level);
    }
    // ancestors run to the root of the base tree, or to the covering cube of a
    // shifted lattice
    const int top = std::min(shift == 0 ? 0 : -1, min_level);
    const Lattice lat(spec, shift, top);
    const std::vector<double> cost = level_costs(lat, beta);
    const auto cost_at = [&](int k) { return cost[static_cast<std::size_t>(k - top)]; };
    const auto gid = [&](int k, index_t flat) { return lat.global_id(k, flat); };

    // reject overlap: duplicate cubes or one containing another
    std::set<index_t> fam_ids;
    for (const DyadicCube& q : family)
        if (!fam_ids.insert(gid(q.level, lat.flat_of_cube(q))).second)
            throw std::invalid_argument("packing_select: duplicate cube in family");
    for (const DyadicCube& q : family) {
        index_t fl = lat.flat_of_cube(q);
        for (int k = q.level; k > top; --k) {
            fl = lat.parent_flat(k, fl);
            if (fam_ids.count(gid(k - 1, fl)))
                throw std::invalid_argument("packing_select: overlapping family");
        }
    }

    PackingSelection out;
    out.family = family;
    std::sort(out.family.begin(), out.family.end(), [](const DyadicCube& a, const DyadicCube& b) {
        if (a.level != b.level) return a.level < b.level; // larger side first
        return a.index < b.index;
    });

    std::vector<double> sel_sum(static_cast<std::size_t>(lat.cube_count()), 0.0);
    std::set<index_t> anc_ids;
    std::vector<std::pair<int, index_t>> anc_list; // (level, flat)
    std::set<index_t> selected_ids;

    for (const DyadicCube& q : out.family) {
        const index_t fl = lat.flat_of_cube(q);
        const double c = cost_at(q.level);

        bool covered = false;
        {
            index_t wf = fl;
            for (int k = q.level; k >= top && !covered; --k) {
                if (anc_ids.count(gid(k, wf))) covered = true;
                if (k > top) wf = lat.parent_flat(k, wf);
            }
        }
        if (covered) continue;

        int bad_k = 1; // > 0 means no violation (levels here are <= depth, top <= 0 possible)
        index_t bad_flat = -1;
        {
            index_t wf = fl;
            for (int k = q.level; k >= top; --k) {
                if (!leq(sel_sum[static_cast<std::size_t>(gid(k, wf))] + c, 2.0 * cost_at(k))) {
                    bad_k = k;
                    bad_flat = wf;
                    break;
                }
                if (k > top) wf = lat.parent_flat(k, wf);
            }
        }
        if (bad_flat < 0) {
            selected_ids.insert(gid(q.level, fl));
            out.selected.push_back(q);
            index_t wf = fl;
            for (int k = q.level; k >= top; --k) {
                sel_sum[static_cast<std::size_t>(gid(k, wf))] += c;
                if (k > top) wf = lat.parent_flat(k, wf);
            }
        } else {
            // the promoted ancestor swallows any previously promoted cube below it
            std::erase_if(anc_list, [&](const std::pair<int, index_t>& a) {
                if (a.first < bad_k) return false;
                index_t wf = a.second;
                for (int k = a.first; k > bad_k; --k) wf = lat.parent_flat(k, wf);
                if (wf == bad_flat) {
                    anc_ids.erase(gid(a.first, a.second));
                    return true;
                }
                return false;
            });
            anc_ids.insert(gid(bad_k, bad_flat));
            anc_list.emplace_back(bad_k, bad_flat);
        }
    }
    std::sort(anc_list.begin(), anc_list.end());
    for (const auto& [k, fl] : anc_list) out.ancestors.push_back(lat.cube(k, fl));

    // ---- certificate ----
    PackingCertificate& cert = out.certificate;

    cert.coverage = true;
    for (const DyadicCube& q : out.family) {
        index_t wf = lat.flat_of_cube(q);
        bool ok = selected_ids.count(gid(q.level, wf)) > 0;
        for (int k = q.level; k >= top && !ok; --k) {
            if (anc_ids.count(gid(k, wf))) ok = true;
            if (k > top) wf = lat.parent_flat(k, wf);
        }
        if (!ok) cert.coverage = false;
    }

    cert.packing_bound = true;
    for (int k = top; k <= lat.finest_level(); ++k) {
        const auto& lv = lat.level(k);
        for (index_t f = 0; f < lv.count; ++f)
            if (!leq(sel_sum[static_cast<std::size_t>(lv.offset + f)], 2.0 * cost_at(k)))
                cert.packing_bound = false;
    }

    cert.ancestor_lower = true;
    for (const auto& [k, fl] : anc_list)
        if (!leq(cost_at(k), sel_sum[static_cast<std::size_t>(gid(k, fl))]))
            cert.ancestor_lower = false;

    // union of the family as cells, and the three-way content sandwich
    CellSet cells(spec);
    std::array<index_t, 32> jlo{}, jhi{};
    for (const DyadicCube& q : out.family) {
        box_of(lat, q.level, lat.flat_of_cube(q), jlo, jhi);
        for_each_box_cell(spec, jlo, jhi, [&](index_t cell) { cells.add(cell); });
    }
    out.union_content = lattice_content_value(lat, cells.words(), beta);
    for (const DyadicCube& q : out.selected) out.selected_cost += cost_at(q.level);
    double mixed = 0.0;
    for (const auto& [k, fl] : anc_list) mixed += cost_at(k);
    for (const DyadicCube& q : out.selected) {
        index_t wf = lat.flat_of_cube(q);
        bool inside = false;
        for (int k = q.level; k >= top && !inside; --k) {
            if (anc_ids.count(gid(k, wf))) inside = true;
            if (k > top) wf = lat.parent_flat(k, wf);
        }
        if (!inside) mixed += cost_at(q.level);
    }
    out.mixed_cover_cost = mixed;
    cert.content_sandwich = leq(out.union_content, out.mixed_cover_cost) &&
                            leq(out.mixed_cover_cost, out.selected_cost) &&
                            leq(out.selected_cost, 2.0 * out.union_content);
    return out;
}

// ---------------------------------------------------------------------------
// good-lambda for the sharp maximal

GoodLambdaSharpEvaluator::GoodLambdaSharpEvaluator(const GridFunction& f, double beta,
                                                   CPolicy policy)
    : beta_(beta),
      maximal_(dyadic_maximal(f, beta)),
      sharp_(dyadic_sharp_maximal(f, beta, policy)) {}

GoodLambdaSharp GoodLambdaSharpEvaluator::eval(double t, double A) const {
    if (!(t > 0.0) || !(A > 0.0))
        throw std::invalid_argument("goodlambda_sharp_check: t and A must be positive");
    const ContentParams params{beta_};
    GoodLambdaSharp r;
    r.t = t;
    r.A = A;
    r.mu_t = content(maximal_.superlevel(t), params);
    r.sharp_term = content(sharp_.superlevel(t / A), params);
    r.mu_low = content(maximal_.superlevel(std::pow(2.0, -beta_ - 2.0) * t), params);
    r.rhs8 = r.sharp_term + (8.0 / A) * r.mu_low;
    r.rhs16 = r.sharp_term + (16.0 / A) * r.mu_low;
    r.margin8 = r.rhs8 - r.mu_t;
    r.margin16 = r.rhs16 - r.mu_t;
    return r;
}

GoodLambdaSharp goodlambda_sharp_check(const GridFunction& f, double beta, double t, double A,
                                       CPolicy policy) {
    return GoodLambdaSharpEvaluator(f, beta, policy).eval(t, A);
}

} // namespace hct
