#include "hct/content.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace hct {

void ContentParams::validate(int dim) const {
    if (!(beta > 0.0) || !(beta <= static_cast<double>(dim)) || !std::isfinite(beta))
        throw std::invalid_argument("ContentParams: beta must lie in (0, dim]");
}

double ContentParams::omega() const {
    return std::pow(std::numbers::pi, beta / 2.0) / std::tgamma(beta / 2.0 + 1.0);
}

ContentTree::ContentTree(RootSpec spec, ContentParams params)
    : base_(std::move(spec), 0u, 0), params_(params) {
    params_.validate(base_.dim());
    values_.assign(static_cast<std::size_t>(base_.cube_count()), 0.0);
}

ContentTree content_tree(const CellSet& E, const ContentParams& params) {
    ContentTree tree(E.spec(), params);
    lattice_content_dp(tree.base_, E.words(), params.beta, tree.values_);
    return tree;
}

double content(const CellSet& E, const ContentParams& params) {
    return content_tree(E, params).root();
}

double content_proxy(const CellSet& E, const ContentParams& params, int depth_margin) {
    params.validate(E.spec().dim);
    if (depth_margin < 1)
        throw std::invalid_argument("content_proxy: depth_margin must be >= 1");
    double best = std::numeric_limits<double>::infinity();
    for (const Lattice& lat : shifted_lattices(E.spec(), depth_margin))
        best = std::min(best, lattice_content_value(lat, E.words(), params.beta));
    return params.report_scale() * best;
}

namespace {

struct CoverSearch {
    int levels = 0;                       // depth + 1
    std::vector<std::uint64_t> cell_mask; // per cell, per ancestor level: covered cells
    std::vector<double> cube_cost;        // cost per level
    double per_cell_bound = 0.0;
    double best = 0.0;

    // masks/costs of the ancestors of `cell`, coarse to fine
    std::uint64_t ancestor_mask(index_t cell, int k) const {
        return cell_mask[static_cast<std::size_t>(cell) * levels + k];
    }

    void dfs(std::uint64_t uncovered, double cost) {
        if (uncovered == 0) {
            best = std::min(best, cost);
            return;
        }
        const double bound = cost + static_cast<double>(std::popcount(uncovered)) * per_cell_bound;
        if (bound >= best) return;
        const int cell = std::countr_zero(uncovered);
        for (int k = 0; k < levels; ++k) {
            const double c = cost + cube_cost[static_cast<std::size_t>(k)];
            if (c >= best) continue;
            dfs(uncovered & ~ancestor_mask(cell, k), c);
        }
    }
};

} // namespace

double brute_force_content(const CellSet& E, const ContentParams& params) {
    const RootSpec& spec = E.spec();
    params.validate(spec.dim);
    if (spec.cell_count() > 64)
        throw InstanceTooLargeError("brute_force_content: more than 64 cells");
    if (E.is_empty()) return 0.0;

    const int n = spec.depth;
    const index_t cells = spec.cell_count();
    CoverSearch s;
    s.levels = n + 1;
    s.cube_cost.resize(static_cast<std::size_t>(n + 1));
    for (int k = 0; k <= n; ++k)
        s.cube_cost[static_cast<std::size_t>(k)] = std::pow(spec.side * std::ldexp(1.0, -k), params.beta);

    // cost-per-cell lower bound: the best any single cube achieves
    s.per_cell_bound = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= n; ++k) {
        const double covered = std::ldexp(1.0, spec.dim * (n - k));
        s.per_cell_bound = std::min(s.per_cell_bound, s.cube_cost[static_cast<std::size_t>(k)] / covered);
    }

    // For cell j, its level-k ancestor covers all cells sharing the top k bits
    // of every axis coordinate.
    s.cell_mask.assign(static_cast<std::size_t>(cells) * s.levels, 0);
    std::vector<index_t> ca(static_cast<std::size_t>(spec.dim)), cb(static_cast<std::size_t>(spec.dim));
    for (index_t a = 0; a < cells; ++a) {
        spec.cell_coords(a, ca);
        for (index_t b = 0; b < cells; ++b) {
            spec.cell_coords(b, cb);
            for (int k = 0; k <= n; ++k) {
                bool same = true;
                for (int ax = 0; ax < spec.dim; ++ax)
                    if ((ca[static_cast<std::size_t>(ax)] >> (n - k)) != (cb[static_cast<std::size_t>(ax)] >> (n - k))) {
                        same = false;
                        break;
                    }
                if (same)
                    s.cell_mask[static_cast<std::size_t>(a) * s.levels + k] |= std::uint64_t(1) << b;
            }
        }
    }

    std::uint64_t target = 0;
    for (index_t c : E.members()) target |= std::uint64_t(1) << c;

    // valid starting covers: every member cell by itself, or the root alone
    s.best = std::min(static_cast<double>(E.size()) * s.cube_cost[static_cast<std::size_t>(n)],
                      s.cube_cost[0]);
    s.dfs(target, 0.0);
    return params.report_scale() * s.best;
}

} // namespace hct
