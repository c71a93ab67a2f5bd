#include "hct/choquet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hct/errors.hpp"

namespace hct {

GridFunction::GridFunction(RootSpec spec, std::vector<double> values)
    : spec_(std::move(spec)), values_(std::move(values)) {
    spec_.validate();
    if (static_cast<index_t>(values_.size()) != spec_.cell_count())
        throw std::invalid_argument("GridFunction: value count must match the cell count");
    for (double v : values_)
        if (!(v >= 0.0) || !std::isfinite(v))
            throw std::invalid_argument("GridFunction: values must be nonnegative and finite");
}

GridFunction GridFunction::constant(const RootSpec& spec, double c) {
    spec.validate();
    return GridFunction(spec, std::vector<double>(static_cast<std::size_t>(spec.cell_count()), c));
}

GridFunction GridFunction::indicator(const CellSet& set, double scale) {
    std::vector<double> v(static_cast<std::size_t>(set.spec().cell_count()), 0.0);
    for (index_t c = 0; c < set.spec().cell_count(); ++c)
        if (set.contains(c)) v[static_cast<std::size_t>(c)] = scale;
    return GridFunction(set.spec(), std::move(v));
}

std::vector<double> GridFunction::distinct_values() const {
    std::vector<double> v = values_;
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

double GridFunction::max_value() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, v);
    return m;
}

CellSet GridFunction::support() const { return superlevel(0.0); }

CellSet GridFunction::superlevel(double t) const {
    CellSet s(spec_);
    for (index_t c = 0; c < size(); ++c)
        if (values_[static_cast<std::size_t>(c)] > t) s.add(c);
    return s;
}

Quantization quantize(const GridFunction& f, int levels, double beta) {
    if (levels < 2) throw std::invalid_argument("quantize: need at least 2 value levels");
    ContentParams{beta}.validate(f.spec().dim);
    std::vector<double> distinct = f.distinct_values();
    if (static_cast<int>(distinct.size()) <= levels)
        return {f, true, 0.0};

    // multiplicity-weighted quantiles; rank endpoints keep min and max
    std::vector<double> sorted(f.values().begin(), f.values().end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> reps;
    reps.reserve(static_cast<std::size_t>(levels));
    const index_t n = static_cast<index_t>(sorted.size());
    for (int i = 0; i < levels; ++i) {
        const index_t rank = (n - 1) * i / (levels - 1);
        reps.push_back(sorted[static_cast<std::size_t>(rank)]);
    }
    reps.erase(std::unique(reps.begin(), reps.end()), reps.end());

    std::vector<double> q(f.values().begin(), f.values().end());
    double gap = 0.0;
    for (auto& v : q) {
        auto it = std::upper_bound(reps.begin(), reps.end(), v);
        const double rep = *std::prev(it); // reps.front() == min value, so prev exists
        gap = std::max(gap, v - rep);
        v = rep;
    }
    const double bound = gap * content(f.support(), ContentParams{beta});
    return {GridFunction(f.spec(), std::move(q)), false, bound};
}

namespace {

// thresholds: sorted distinct positive values of f restricted to `region`
std::vector<double> region_thresholds(const GridFunction& f, const CellSet* region) {
    std::vector<double> t;
    for (index_t c = 0; c < f.size(); ++c)
        if ((!region || region->contains(c)) && f[c] > 0.0) t.push_back(f[c]);
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

// layer-cake accumulation of per-cube contents over one lattice
std::vector<double> layer_cake_all_cubes(const Lattice& lat, const GridFunction& f,
                                         const CellSet* region, double beta) {
    std::vector<double> acc(static_cast<std::size_t>(lat.cube_count()), 0.0);
    const std::vector<double> ts = region_thresholds(f, region);
    if (ts.empty()) return acc;

    const RootSpec& spec = lat.spec();
    std::vector<std::uint64_t> words(static_cast<std::size_t>((spec.cell_count() + 63) / 64), 0);
    std::vector<double> buf(static_cast<std::size_t>(lat.cube_count()));
    double prev = 0.0;
    for (double t : ts) {
        std::fill(words.begin(), words.end(), 0);
        for (index_t c = 0; c < f.size(); ++c)
            if (f[c] > prev && (!region || region->contains(c)))
                words[static_cast<std::size_t>(c >> 6)] |= std::uint64_t(1) << (c & 63);
        lattice_content_dp(lat, words, beta, buf);
        const double w = t - prev;
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * buf[i];
        prev = t;
    }
    return acc;
}

double layer_cake_root(const Lattice& lat, const GridFunction& f, const CellSet* region,
                       double beta) {
    const std::vector<double> acc = layer_cake_all_cubes(lat, f, region, beta);
    const Lattice::Level& top = lat.level(lat.top_level());
    double v = 0.0;
    for (index_t i = 0; i < top.count; ++i) v += acc[static_cast<std::size_t>(top.offset + i)];
    return v;
}

Lattice base_lattice(const RootSpec& spec) { return Lattice(spec, 0u, 0); }

} // namespace

double integral(const GridFunction& f, const CellSet& region, double beta) {
    if (!f.spec().same_grid(region.spec()))
        throw std::invalid_argument("integral: function and region on different grids");
    ContentParams{beta}.validate(f.spec().dim);
    return layer_cake_root(base_lattice(f.spec()), f, &region, beta);
}

double integral(const GridFunction& f, double beta) {
    ContentParams{beta}.validate(f.spec().dim);
    return layer_cake_root(base_lattice(f.spec()), f, nullptr, beta);
}

CubeIntegralTree::CubeIntegralTree(RootSpec spec, double beta)
    : base_(std::move(spec), 0u, 0), beta_(beta) {
    values_.assign(static_cast<std::size_t>(base_.cube_count()), 0.0);
}

CubeIntegralTree cube_integrals(const GridFunction& f, double beta) {
    ContentParams{beta}.validate(f.spec().dim);
    CubeIntegralTree tree(f.spec(), beta);
    tree.values_ = layer_cake_all_cubes(tree.base_, f, nullptr, beta);
    return tree;
}

std::vector<double> lattice_cube_integrals(const Lattice& lat, const GridFunction& f, double beta) {
    if (!lat.spec().same_grid(f.spec()))
        throw std::invalid_argument("lattice_cube_integrals: mismatched grids");
    ContentParams{beta}.validate(f.spec().dim);
    return layer_cake_all_cubes(lat, f, nullptr, beta);
}

double lp_norm(const GridFunction& f, double p, double beta) {
    if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("lp_norm: p must be in (0, inf)");
    ContentParams{beta}.validate(f.spec().dim);
    std::vector<double> powed(f.values().begin(), f.values().end());
    for (auto& v : powed) v = std::pow(v, p);
    const GridFunction fp(f.spec(), std::move(powed));
    return std::pow(layer_cake_root(base_lattice(f.spec()), fp, nullptr, beta), 1.0 / p);
}

double weak_lp_norm(const GridFunction& f, double p, double beta) {
    if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("weak_lp_norm: p must be in (0, inf)");
    const ContentParams params{beta};
    params.validate(f.spec().dim);
    const std::vector<double> vs = f.distinct_values();
    double best = 0.0;
    // left limits at the distinct values: lambda -> v gives v * content({f >= v})^{1/p},
    // which realizes the supremum for a step function
    for (double v : vs) {
        if (v <= 0.0) continue;
        CellSet ge(f.spec());
        for (index_t c = 0; c < f.size(); ++c)
            if (f[c] >= v) ge.add(c);
        best = std::max(best, v * std::pow(content(ge, params), 1.0 / p));
    }
    // the quantized grid and midpoints, evaluated with the strict level set
    std::vector<double> lambdas;
    for (std::size_t i = 0; i < vs.size(); ++i) {
        lambdas.push_back(vs[i]);
        if (i + 1 < vs.size()) lambdas.push_back(0.5 * (vs[i] + vs[i + 1]));
    }
    for (double l : lambdas) {
        if (l <= 0.0) continue;
        best = std::max(best, l * std::pow(content(f.superlevel(l), params), 1.0 / p));
    }
    return best;
}

double exp_functional(const GridFunction& f, double gamma, const CellSet& region, double beta) {
    if (!(gamma > 0.0)) throw std::invalid_argument("exp_functional: gamma must be positive");
    if (!f.spec().same_grid(region.spec()))
        throw std::invalid_argument("exp_functional: function and region on different grids");
    ContentParams{beta}.validate(f.spec().dim);
    std::vector<double> g(static_cast<std::size_t>(f.size()));
    for (index_t c = 0; c < f.size(); ++c) {
        const double e = std::exp(gamma * f[c]);
        if (!std::isfinite(e))
            throw ExpOverflowError("exp_functional: exp(gamma*f) overflowed", c);
        g[static_cast<std::size_t>(c)] = e;
    }
    return layer_cake_root(base_lattice(f.spec()), GridFunction(f.spec(), std::move(g)), &region, beta);
}

EmbeddingSides embedding_check(const GridFunction& f, double alpha, double beta) {
    const int d = f.spec().dim;
    if (!(alpha > 0.0) || !(alpha <= beta) || !(beta <= static_cast<double>(d)))
        throw std::invalid_argument("embedding_check: need 0 < alpha <= beta <= dim");
    EmbeddingSides sides;
    sides.lhs = integral(f, beta);
    std::vector<double> g(f.values().begin(), f.values().end());
    for (auto& v : g) v = std::pow(v, alpha / beta);
    const double inner = integral(GridFunction(f.spec(), std::move(g)), alpha);
    sides.rhs = (beta / alpha) * std::pow(inner, beta / alpha);
    return sides;
}

} // namespace hct
