#include "hct/operators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hct/lattice_dp.hpp"
#include "hct/parallel.hpp"

namespace hct {

double OperatorField::max_value() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
}

CellSet OperatorField::superlevel(double t) const {
    CellSet s(spec);
    for (index_t c = 0; c < size(); ++c)
        if (values[static_cast<std::size_t>(c)] > t) s.add(c);
    return s;
}

namespace {

// per-cell field from per-cube scores: max over the chain of cubes containing
// the cell, from min_level down to the leaves
std::vector<double> downward_max_field(const Lattice& lat, std::span<const double> score,
                                       int min_level) {
    const int n = lat.finest_level();
    std::vector<double> run(static_cast<std::size_t>(lat.cube_count()), 0.0);
    for (int k = min_level; k <= n; ++k) {
        const auto& lv = lat.level(k);
        for (index_t f = 0; f < lv.count; ++f) {
            double s = score[static_cast<std::size_t>(lv.offset + f)];
            if (k > min_level) {
                const index_t p = lat.parent_flat(k, f);
                if (p >= 0) s = std::max(s, run[static_cast<std::size_t>(lat.level(k - 1).offset + p)]);
            }
            run[static_cast<std::size_t>(lv.offset + f)] = s;
        }
    }
    const RootSpec& spec = lat.spec();
    std::vector<double> field(static_cast<std::size_t>(spec.cell_count()));
    const auto& leaf = lat.level(n);
    for (index_t c = 0; c < spec.cell_count(); ++c)
        field[static_cast<std::size_t>(c)] =
            run[static_cast<std::size_t>(leaf.offset + lat.leaf_of_cell(c))];
    return field;
}

std::vector<double> average_scores(const Lattice& lat, std::span<const double> integrals,
                                   double beta) {
    std::vector<double> score(integrals.begin(), integrals.end());
    for (int k = lat.top_level(); k <= lat.finest_level(); ++k) {
        const auto& lv = lat.level(k);
        const double inv = 1.0 / std::pow(lat.side(k), beta);
        for (index_t f = 0; f < lv.count; ++f) score[static_cast<std::size_t>(lv.offset + f)] *= inv;
    }
    return score;
}

void pointwise_max(std::vector<double>& acc, std::span<const double> other) {
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = std::max(acc[i], other[i]);
}

// ---------------------------------------------------------------------------
// oscillation machinery

void make_candidates(const std::vector<double>& vs, CPolicy policy, std::vector<double>& out) {
    out.clear();
    out.insert(out.end(), vs.begin(), vs.end());
    if (policy == CPolicy::AdjacentMidpoints) {
        for (std::size_t i = 0; i + 1 < vs.size(); ++i) out.push_back(0.5 * (vs[i] + vs[i + 1]));
    } else {
        for (std::size_t i = 0; i < vs.size(); ++i)
            for (std::size_t j = i + 1; j < vs.size(); ++j) out.push_back(0.5 * (vs[i] + vs[j]));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
}

struct OscWorker {
    SubtreeScratch scratch;
    std::vector<double> leafv;
    std::vector<double> g;
    std::vector<double> distinct;
    std::vector<double> candidates;
    std::vector<double> rel_cost;

    // minimized oscillation integral over the cube at (k, flat); also reports
    // the minimizing constant
    double best_c(const Lattice& lat, int k, index_t flat, const GridFunction& f, double beta,
                  CPolicy policy, double* c_out) {
        const SubtreeView view = SubtreeView::of(lat, k, flat);
        const index_t leaves = view.leaf_count();
        leafv.assign(static_cast<std::size_t>(leaves), 0.0);
        g.assign(static_cast<std::size_t>(leaves), 0.0);
        distinct.clear();
        bool any = false;
        for (index_t z = 0; z < leaves; ++z) {
            const index_t cell = view.leaf_cell[static_cast<std::size_t>(z)];
            if (cell < 0) continue;
            leafv[static_cast<std::size_t>(z)] = f[cell];
            distinct.push_back(f[cell]);
            any = true;
        }
        if (!any) throw std::invalid_argument("best_constant_c: cube covers no cells");
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        if (distinct.size() == 1) {
            if (c_out) *c_out = distinct[0];
            return 0.0;
        }

        rel_cost.resize(static_cast<std::size_t>(view.rel_levels));
        for (int j = 0; j < view.rel_levels; ++j)
            rel_cost[static_cast<std::size_t>(j)] = std::pow(lat.side(k + j), beta);

        make_candidates(distinct, policy, candidates);
        double best = std::numeric_limits<double>::infinity();
        double best_c_val = candidates.front();
        for (double c : candidates) {
            for (index_t z = 0; z < leaves; ++z)
                g[static_cast<std::size_t>(z)] =
                    view.leaf_cell[static_cast<std::size_t>(z)] >= 0
                        ? std::abs(leafv[static_cast<std::size_t>(z)] - c)
                        : 0.0;
            const double val = subtree_layer_cake(view, g, rel_cost, scratch);
            if (val < best) {
                best = val;
                best_c_val = c;
            }
        }
        if (c_out) *c_out = best_c_val;
        return best;
    }
};

// true when every covered cell carries the same value (oscillation zero)
bool cube_is_flat(const Lattice& lat, int k, index_t flat, const GridFunction& f) {
    std::array<index_t, 32> jlo{}, jhi{};
    const int d = lat.dim();
    lat.cell_box(k, flat, std::span<index_t>(jlo.data(), static_cast<std::size_t>(d)),
                 std::span<index_t>(jhi.data(), static_cast<std::size_t>(d)));
    double ref = -1.0;
    std::array<index_t, 32> j = jlo;
    for (int a = 0; a < d; ++a)
        if (jlo[static_cast<std::size_t>(a)] > jhi[static_cast<std::size_t>(a)]) return true;
    while (true) {
        index_t cell = 0;
        for (int a = 0; a < d; ++a) cell = (cell << lat.spec().depth) | j[static_cast<std::size_t>(a)];
        const double v = f[cell];
        if (ref < 0.0) ref = v;
        else if (v != ref) return false;
        int axis = d - 1;
        while (axis >= 0 && ++j[static_cast<std::size_t>(axis)] > jhi[static_cast<std::size_t>(axis)]) {
            j[static_cast<std::size_t>(axis)] = jlo[static_cast<std::size_t>(axis)];
            --axis;
        }
        if (axis < 0) break;
    }
    return true;
}

// per-cube minimized oscillation integrals, level-major
std::vector<double> lattice_oscillations(const Lattice& lat, const GridFunction& f, double beta,
                                         CPolicy policy) {
    std::vector<double> osc(static_cast<std::size_t>(lat.cube_count()), 0.0);
    const int jobs = default_jobs();
    for (int k = lat.top_level(); k <= lat.finest_level(); ++k) {
        const auto& lv = lat.level(k);
        parallel_chunks(lv.count, jobs, [&](int, index_t lo, index_t hi) {
            OscWorker worker;
            for (index_t fidx = lo; fidx < hi; ++fidx) {
                if (cube_is_flat(lat, k, fidx, f)) continue;
                osc[static_cast<std::size_t>(lv.offset + fidx)] =
                    worker.best_c(lat, k, fidx, f, beta, policy, nullptr);
            }
        });
    }
    return osc;
}

Lattice base_lattice(const RootSpec& spec) { return Lattice(spec, 0u, 0); }

} // namespace

// ---------------------------------------------------------------------------
// public operators

OperatorField dyadic_maximal(const GridFunction& f, double beta) {
    ContentParams{beta}.validate(f.spec().dim);
    const Lattice base = base_lattice(f.spec());
    const std::vector<double> integrals = lattice_cube_integrals(base, f, beta);
    const std::vector<double> score = average_scores(base, integrals, beta);
    return {f.spec(), downward_max_field(base, score, 0), "dyadic-maximal"};
}

OperatorField beta_maximal(const GridFunction& f, double beta, int depth_margin) {
    ContentParams{beta}.validate(f.spec().dim);
    std::vector<double> field(static_cast<std::size_t>(f.spec().cell_count()), 0.0);
    for (const Lattice& lat : shifted_lattices(f.spec(), depth_margin)) {
        const std::vector<double> integrals = lattice_cube_integrals(lat, f, beta);
        const std::vector<double> score = average_scores(lat, integrals, beta);
        pointwise_max(field, downward_max_field(lat, score, lat.top_level()));
    }
    return {f.spec(), std::move(field), "beta-maximal"};
}

BestC best_constant_c(const GridFunction& f, const DyadicCube& Q, double beta, CPolicy policy) {
    ContentParams{beta}.validate(f.spec().dim);
    const Lattice lat(f.spec(), Q.shift, std::min(0, Q.level));
    const index_t flat = lat.flat_of_cube(Q);
    OscWorker worker;
    BestC out;
    out.cube = Q;
    out.value = worker.best_c(lat, Q.level, flat, f, beta, policy, &out.c);
    return out;
}

OperatorField dyadic_sharp_maximal(const GridFunction& f, double beta, CPolicy policy) {
    ContentParams{beta}.validate(f.spec().dim);
    const Lattice base = base_lattice(f.spec());
    const std::vector<double> osc = lattice_oscillations(base, f, beta, policy);
    const std::vector<double> score = average_scores(base, osc, beta);
    return {f.spec(), downward_max_field(base, score, 0), "dyadic-sharp-maximal"};
}

OperatorField sharp_maximal(const GridFunction& f, double beta, CPolicy policy, int depth_margin) {
    ContentParams{beta}.validate(f.spec().dim);
    std::vector<double> field(static_cast<std::size_t>(f.spec().cell_count()), 0.0);
    for (const Lattice& lat : shifted_lattices(f.spec(), depth_margin)) {
        const std::vector<double> osc = lattice_oscillations(lat, f, beta, policy);
        const std::vector<double> score = average_scores(lat, osc, beta);
        pointwise_max(field, downward_max_field(lat, score, lat.top_level()));
    }
    return {f.spec(), std::move(field), "sharp-maximal"};
}

OperatorField centered_sharp_maximal(const GridFunction& f, double beta, CPolicy policy,
                                     int depth_margin) {
    ContentParams{beta}.validate(f.spec().dim);
    std::vector<double> field(static_cast<std::size_t>(f.spec().cell_count()), 0.0);
    for (const Lattice& lat : shifted_lattices(f.spec(), depth_margin)) {
        const std::vector<double> osc = lattice_oscillations(lat, f, beta, policy);
        const std::vector<double> score = average_scores(lat, osc, beta);
        for (int k = lat.top_level(); k <= lat.finest_level(); ++k) {
            const auto& lv = lat.level(k);
            for (index_t fl = 0; fl < lv.count; ++fl) {
                const index_t cc = lat.center_cell(k, fl);
                if (cc < 0) continue;
                auto& slot = field[static_cast<std::size_t>(cc)];
                slot = std::max(slot, score[static_cast<std::size_t>(lv.offset + fl)]);
            }
        }
    }
    return {f.spec(), std::move(field), "centered-sharp-maximal"};
}

OperatorField fractional_maximal(const DiscreteMeasure& mu, double alpha, int depth_margin) {
    const int d = mu.spec().dim;
    if (!(alpha > 0.0) || !(alpha < static_cast<double>(d)))
        throw std::invalid_argument("fractional_maximal: alpha must lie in (0, dim)");
    const std::vector<double> folded = mu.folded_cell_masses();
    std::vector<double> field(static_cast<std::size_t>(mu.spec().cell_count()), 0.0);
    for (const Lattice& lat : shifted_lattices(mu.spec(), depth_margin)) {
        std::vector<double> mass(static_cast<std::size_t>(lat.cube_count()), 0.0);
        const int n = lat.finest_level();
        const auto& leaf = lat.level(n);
        for (index_t fl = 0; fl < leaf.count; ++fl) {
            const index_t cell = lat.leaf_cell(fl);
            if (cell >= 0) mass[static_cast<std::size_t>(leaf.offset + fl)] = folded[static_cast<std::size_t>(cell)];
        }
        std::array<index_t, 64> kid{};
        for (int k = n - 1; k >= lat.top_level(); --k) {
            const auto& lv = lat.level(k);
            const auto& cv = lat.level(k + 1);
            const unsigned nc = 1u << d;
            for (index_t fl = 0; fl < lv.count; ++fl) {
                lat.children(k, fl, std::span<index_t>(kid.data(), nc));
                double s = 0.0;
                for (unsigned c = 0; c < nc; ++c)
                    if (kid[c] >= 0) s += mass[static_cast<std::size_t>(cv.offset + kid[c])];
                mass[static_cast<std::size_t>(lv.offset + fl)] = s;
            }
        }
        const std::vector<double> score = average_scores(lat, mass, static_cast<double>(d) - alpha);
        pointwise_max(field, downward_max_field(lat, score, lat.top_level()));
    }
    return {mu.spec(), std::move(field), "fractional-maximal"};
}

double bmo_beta_norm(const GridFunction& u, const CellSet& omega, double beta, CPolicy policy,
                     int depth_margin) {
    ContentParams{beta}.validate(u.spec().dim);
    if (!u.spec().same_grid(omega.spec()))
        throw std::invalid_argument("bmo_beta_norm: function and omega on different grids");
    if (omega.is_empty()) throw std::invalid_argument("bmo_beta_norm: omega is empty");
    const bool omega_full = omega.size() == u.spec().cell_count();
    const int d = u.spec().dim;
    double sup = 0.0;
    for (const Lattice& lat : shifted_lattices(u.spec(), depth_margin)) {
        OscWorker worker;
        std::array<index_t, 32> jlo{}, jhi{};
        for (int k = lat.top_level(); k <= lat.finest_level(); ++k) {
            const auto& lv = lat.level(k);
            const double inv = 1.0 / std::pow(lat.side(k), beta);
            for (index_t fl = 0; fl < lv.count; ++fl) {
                lat.cell_box(k, fl, std::span<index_t>(jlo.data(), static_cast<std::size_t>(d)),
                             std::span<index_t>(jhi.data(), static_cast<std::size_t>(d)));
                bool empty = false, inside = true;
                for (int a = 0; a < d; ++a)
                    if (jlo[static_cast<std::size_t>(a)] > jhi[static_cast<std::size_t>(a)]) empty = true;
                if (empty) continue;
                if (!omega_full) {
                    std::array<index_t, 32> j = jlo;
                    while (inside) {
                        index_t cell = 0;
                        for (int a = 0; a < d; ++a)
                            cell = (cell << u.spec().depth) | j[static_cast<std::size_t>(a)];
                        if (!omega.contains(cell)) inside = false;
                        int axis = d - 1;
                        while (axis >= 0 &&
                               ++j[static_cast<std::size_t>(axis)] > jhi[static_cast<std::size_t>(axis)]) {
                            j[static_cast<std::size_t>(axis)] = jlo[static_cast<std::size_t>(axis)];
                            --axis;
                        }
                        if (axis < 0) break;
                    }
                    if (!inside) continue;
                }
                if (cube_is_flat(lat, k, fl, u)) continue;
                sup = std::max(sup, worker.best_c(lat, k, fl, u, beta, policy, nullptr) * inv);
            }
        }
    }
    return sup;
}

MorreyNorm morrey_norm(const DiscreteMeasure& mu, const CellSet& omega, double beta) {
    ContentParams{beta}.validate(mu.spec().dim);
    if (!mu.spec().same_grid(omega.spec()))
        throw std::invalid_argument("morrey_norm: measure and omega on different grids");
    if (omega.is_empty()) throw std::invalid_argument("morrey_norm: omega is empty");
    const RootSpec& spec = mu.spec();
    const int d = spec.dim;
    const int n = spec.depth;
    const index_t per = spec.cells_per_axis();

    // d-dimensional prefix sums over omega-restricted masses
    const std::vector<double> folded = mu.folded_cell_masses();
    std::vector<index_t> ext(static_cast<std::size_t>(d), per + 1);
    std::vector<index_t> stride(static_cast<std::size_t>(d));
    index_t tot = 1;
    for (int a = d - 1; a >= 0; --a) {
        stride[static_cast<std::size_t>(a)] = tot;
        tot *= per + 1;
    }
    std::vector<double> sat(static_cast<std::size_t>(tot), 0.0);
    std::vector<index_t> cc(static_cast<std::size_t>(d));
    for (index_t c = 0; c < spec.cell_count(); ++c) {
        if (!omega.contains(c)) continue;
        spec.cell_coords(c, cc);
        index_t pos = 0;
        for (int a = 0; a < d; ++a) pos += (cc[static_cast<std::size_t>(a)] + 1) * stride[static_cast<std::size_t>(a)];
        sat[static_cast<std::size_t>(pos)] += folded[static_cast<std::size_t>(c)];
    }
    // accumulate along each axis
    for (int a = 0; a < d; ++a) {
        for (index_t pos = 0; pos < tot; ++pos) {
            const index_t coord = (pos / stride[static_cast<std::size_t>(a)]) % (per + 1);
            if (coord > 0)
                sat[static_cast<std::size_t>(pos)] +=
                    sat[static_cast<std::size_t>(pos - stride[static_cast<std::size_t>(a)])];
        }
    }
    const auto box_sum = [&](std::span<const index_t> lo, std::span<const index_t> hi) {
        // inclusive box via inclusion-exclusion on the prefix array
        double s = 0.0;
        for (unsigned corner = 0; corner < (1u << d); ++corner) {
            index_t pos = 0;
            int sign = 1;
            for (int a = 0; a < d; ++a) {
                const bool high = (corner >> a) & 1u;
                const index_t edge = high ? hi[static_cast<std::size_t>(a)] + 1 : lo[static_cast<std::size_t>(a)];
                if (!high) sign = -sign;
                pos += edge * stride[static_cast<std::size_t>(a)];
            }
            s += sign * sat[static_cast<std::size_t>(pos)];
        }
        return s;
    };

    MorreyNorm out;
    out.per_radius.assign(static_cast<std::size_t>(n + 1), 0.0);
    std::vector<index_t> lo(static_cast<std::size_t>(d)), hi(static_cast<std::size_t>(d));
    for (int k = 0; k <= n; ++k) {
        const double r = spec.side * std::ldexp(1.0, -k);
        const index_t w = (index_t(1) << (n - k)) - 1; // center distance < r, in cell units
        const double inv = 1.0 / std::pow(r, beta);
        double sup = 0.0;
        for (index_t c = 0; c < spec.cell_count(); ++c) {
            if (!omega.contains(c)) continue;
            spec.cell_coords(c, cc);
            for (int a = 0; a < d; ++a) {
                lo[static_cast<std::size_t>(a)] = std::max<index_t>(0, cc[static_cast<std::size_t>(a)] - w);
                hi[static_cast<std::size_t>(a)] = std::min<index_t>(per - 1, cc[static_cast<std::size_t>(a)] + w);
            }
            sup = std::max(sup, box_sum(lo, hi) * inv);
        }
        out.per_radius[static_cast<std::size_t>(k)] = sup;
        out.value = std::max(out.value, sup);
    }
    if (n >= 1) {
        const double finest = out.per_radius[static_cast<std::size_t>(n)];
        const double coarse = out.per_radius[static_cast<std::size_t>(std::max(0, n - 3))];
        out.fine_scale_divergence = finest >= out.value && finest >= 1.5 * coarse;
    }
    return out;
}

// ---------------------------------------------------------------------------
// classical (Lebesgue-path) references

namespace classical {

namespace {

std::vector<double> cube_volume_integrals(const Lattice& lat, const GridFunction& f) {
    std::vector<double> out(static_cast<std::size_t>(lat.cube_count()), 0.0);
    const int d = lat.dim();
    const int n = lat.finest_level();
    const double vol = lat.spec().cell_volume();
    const auto& leaf = lat.level(n);
    for (index_t fl = 0; fl < leaf.count; ++fl) {
        const index_t cell = lat.leaf_cell(fl);
        if (cell >= 0) out[static_cast<std::size_t>(leaf.offset + fl)] = f[cell] * vol;
    }
    std::array<index_t, 64> kid{};
    for (int k = n - 1; k >= lat.top_level(); --k) {
        const auto& lv = lat.level(k);
        const auto& cv = lat.level(k + 1);
        const unsigned nc = 1u << d;
        for (index_t fl = 0; fl < lv.count; ++fl) {
            lat.children(k, fl, std::span<index_t>(kid.data(), nc));
            double s = 0.0;
            for (unsigned c = 0; c < nc; ++c)
                if (kid[c] >= 0) s += out[static_cast<std::size_t>(cv.offset + kid[c])];
            out[static_cast<std::size_t>(lv.offset + fl)] = s;
        }
    }
    return out;
}

// weighted-median oscillation with uniform cell weights
std::vector<double> cube_median_oscillations(const Lattice& lat, const GridFunction& f) {
    std::vector<double> out(static_cast<std::size_t>(lat.cube_count()), 0.0);
    const int d = lat.dim();
    const double vol = lat.spec().cell_volume();
    std::array<index_t, 32> jlo{}, jhi{}, j{};
    std::vector<double> vals;
    for (int k = lat.top_level(); k <= lat.finest_level(); ++k) {
        const auto& lv = lat.level(k);
        for (index_t fl = 0; fl < lv.count; ++fl) {
            lat.cell_box(k, fl, std::span<index_t>(jlo.data(), static_cast<std::size_t>(d)),
                         std::span<index_t>(jhi.data(), static_cast<std::size_t>(d)));
            vals.clear();
            bool empty = false;
            for (int a = 0; a < d; ++a)
                if (jlo[static_cast<std::size_t>(a)] > jhi[static_cast<std::size_t>(a)]) empty = true;
            if (empty) continue;
            j = jlo;
            while (true) {
                index_t cell = 0;
                for (int a = 0; a < d; ++a)
                    cell = (cell << lat.spec().depth) | j[static_cast<std::size_t>(a)];
                vals.push_back(f[cell]);
                int axis = d - 1;
                while (axis >= 0 &&
                       ++j[static_cast<std::size_t>(axis)] > jhi[static_cast<std::size_t>(axis)]) {
                    j[static_cast<std::size_t>(axis)] = jlo[static_cast<std::size_t>(axis)];
                    --axis;
                }
                if (axis < 0) break;
            }
            std::sort(vals.begin(), vals.end());
            const double med = vals[(vals.size() - 1) / 2];
            double osc = 0.0;
            for (double v : vals) osc += std::abs(v - med) * vol;
            out[static_cast<std::size_t>(lv.offset + fl)] = osc;
        }
    }
    return out;
}

OperatorField max_field_from(const Lattice& lat, const std::vector<double>& numerators,
                             const GridFunction& f, const char* tag) {
    const double d = static_cast<double>(lat.dim());
    const std::vector<double> score = average_scores(lat, numerators, d);
    return {f.spec(), downward_max_field(lat, score, lat.top_level()), tag};
}

} // namespace

OperatorField dyadic_maximal(const GridFunction& f) {
    const Lattice base(f.spec(), 0u, 0);
    return max_field_from(base, cube_volume_integrals(base, f), f, "classical-dyadic-maximal");
}

OperatorField dyadic_sharp_maximal(const GridFunction& f) {
    const Lattice base(f.spec(), 0u, 0);
    return max_field_from(base, cube_median_oscillations(base, f), f, "classical-dyadic-sharp");
}

OperatorField beta_maximal(const GridFunction& f, int depth_margin) {
    std::vector<double> field(static_cast<std::size_t>(f.spec().cell_count()), 0.0);
    for (const Lattice& lat : shifted_lattices(f.spec(), depth_margin))
        pointwise_max(field, max_field_from(lat, cube_volume_integrals(lat, f), f, "").values);
    return {f.spec(), std::move(field), "classical-beta-maximal"};
}

OperatorField sharp_maximal(const GridFunction& f, int depth_margin) {
    std::vector<double> field(static_cast<std::size_t>(f.spec().cell_count()), 0.0);
    for (const Lattice& lat : shifted_lattices(f.spec(), depth_margin))
        pointwise_max(field, max_field_from(lat, cube_median_oscillations(lat, f), f, "").values);
    return {f.spec(), std::move(field), "classical-sharp-maximal"};
}

double lp_norm(const GridFunction& f, double p) {
    double s = 0.0;
    for (index_t c = 0; c < f.size(); ++c) s += std::pow(f[c], p) * f.spec().cell_volume();
    return std::pow(s, 1.0 / p);
}

double measure_of(const CellSet& s) {
    return static_cast<double>(s.size()) * s.spec().cell_volume();
}

} // namespace classical

} // namespace hct
