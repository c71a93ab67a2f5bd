#include "hct/riesz.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "hct/content.hpp"
#include "hct/parallel.hpp"

namespace hct {

void RieszParams::validate(int dim) const {
    if (!(alpha > 0.0) || !(alpha < static_cast<double>(dim)) || !std::isfinite(alpha))
        throw std::invalid_argument("RieszParams: alpha must lie in (0, dim)");
    if (k_min > k_max) throw std::invalid_argument("RieszParams: k_min must be <= k_max");
}

double RieszParams::gamma(int dim) const {
    return std::pow(std::numbers::pi, dim / 2.0) * std::pow(2.0, alpha) *
           std::tgamma(alpha / 2.0) / std::tgamma((static_cast<double>(dim) - alpha) / 2.0);
}

double kernel_cell_mean(int dim, double alpha) {
    if (dim == 1) return std::pow(2.0, 1.0 - alpha) / alpha; // closed form
    // annulus [-1/2,1/2]^d minus [-1/4,1/4]^d, midpoint rule; the full series
    // over nested annuli is geometric with ratio 2^-alpha
    const int grid = dim == 2 ? 1024 : 128;
    const double h = 1.0 / grid;
    double annulus = 0.0;
    std::vector<index_t> idx(static_cast<std::size_t>(dim), 0);
    std::vector<double> z(static_cast<std::size_t>(dim));
    while (true) {
        bool inner = true;
        for (int a = 0; a < dim; ++a) {
            z[static_cast<std::size_t>(a)] = -0.5 + (idx[static_cast<std::size_t>(a)] + 0.5) * h;
            if (std::abs(z[static_cast<std::size_t>(a)]) > 0.25) inner = false;
        }
        if (!inner) {
            double r2 = 0.0;
            for (double v : z) r2 += v * v;
            annulus += std::pow(r2, 0.5 * (alpha - dim));
        }
        int a = dim - 1;
        while (a >= 0 && ++idx[static_cast<std::size_t>(a)] >= grid) {
            idx[static_cast<std::size_t>(a)] = 0;
            --a;
        }
        if (a < 0) break;
    }
    annulus *= std::pow(h, dim);
    return annulus / (1.0 - std::pow(2.0, -alpha));
}

OperatorField riesz_potential(const DiscreteMeasure& mu, const RieszParams& params) {
    const RootSpec& spec = mu.spec();
    const int d = spec.dim;
    params.validate(d);
    const double inv_gamma = 1.0 / params.gamma(d);
    const double h = spec.cell_side();
    const double self_kernel = std::pow(h, params.alpha - d) * kernel_cell_mean(d, params.alpha);
    const double expo = params.alpha - static_cast<double>(d);

    struct Source {
        std::array<double, 3> x{};
        double mass = 0.0;
        index_t cell = -1;   // cell holding the source
        bool centered = true; // sits exactly at that cell's center
    };
    std::vector<Source> sources;
    std::vector<index_t> cc(static_cast<std::size_t>(d));
    for (index_t c = 0; c < spec.cell_count(); ++c) {
        const double m = mu.cell_masses()[static_cast<std::size_t>(c)];
        if (m <= 0.0) continue;
        Source s;
        spec.cell_coords(c, cc);
        for (int a = 0; a < d; ++a) s.x[static_cast<std::size_t>(a)] = spec.cell_center(cc[static_cast<std::size_t>(a)], a);
        s.mass = m;
        s.cell = c;
        sources.push_back(s);
    }
    for (const Atom& atom : mu.atoms()) {
        Source s;
        for (int a = 0; a < d; ++a) s.x[static_cast<std::size_t>(a)] = atom.position[static_cast<std::size_t>(a)];
        s.mass = atom.mass;
        s.cell = mu.cell_of_point(atom.position);
        spec.cell_coords(s.cell, cc);
        s.centered = true;
        for (int a = 0; a < d; ++a)
            if (atom.position[static_cast<std::size_t>(a)] != spec.cell_center(cc[static_cast<std::size_t>(a)], a))
                s.centered = false;
        sources.push_back(s);
    }

    std::vector<double> field(static_cast<std::size_t>(spec.cell_count()), 0.0);
    parallel_for(spec.cell_count(), default_jobs(), [&](index_t c) {
        std::array<double, 3> x{};
        std::array<index_t, 3> xc{};
        RootSpec s2 = spec;
        s2.cell_coords(c, std::span<index_t>(xc.data(), static_cast<std::size_t>(d)));
        for (int a = 0; a < d; ++a) x[static_cast<std::size_t>(a)] = s2.cell_center(xc[static_cast<std::size_t>(a)], a);
        double acc = 0.0;
        for (const Source& s : sources) {
            double r2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const double dx = x[static_cast<std::size_t>(a)] - s.x[static_cast<std::size_t>(a)];
                r2 += dx * dx;
            }
            if (r2 == 0.0)
                acc += s.mass * self_kernel; // own-cell mass or an atom at the center
            else
                acc += s.mass * std::pow(r2, 0.5 * expo);
        }
        field[static_cast<std::size_t>(c)] = inv_gamma * acc;
    });
    return {spec, std::move(field), "riesz-potential"};
}

namespace {

std::vector<double> lattice_cube_masses(const Lattice& lat, std::span<const double> folded) {
    std::vector<double> mass(static_cast<std::size_t>(lat.cube_count()), 0.0);
    const int d = lat.dim();
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
    return mass;
}

} // namespace

OperatorField dyadic_riesz(const DiscreteMeasure& mu, const RieszParams& params,
                           const Lattice& lat) {
    const RootSpec& spec = mu.spec();
    params.validate(spec.dim);
    if (!lat.spec().same_grid(spec))
        throw std::invalid_argument("dyadic_riesz: lattice and measure on different grids");
    const int n = lat.finest_level();
    const int klo = std::max(params.k_min, lat.top_level());
    const int khi = std::min(params.k_max, n);
    if (klo > khi) throw std::invalid_argument("dyadic_riesz: truncation covers no levels");

    const std::vector<double> folded = mu.folded_cell_masses();
    const std::vector<double> mass = lattice_cube_masses(lat, folded);
    const double expo = static_cast<double>(spec.dim) - params.alpha;

    // running sums down the tree, adding only the levels inside the truncation
    std::vector<double> run(static_cast<std::size_t>(lat.cube_count()), 0.0);
    for (int k = lat.top_level(); k <= n; ++k) {
        const auto& lv = lat.level(k);
        const double inv = 1.0 / std::pow(lat.side(k), expo);
        for (index_t fl = 0; fl < lv.count; ++fl) {
            double s = (k >= klo && k <= khi) ? mass[static_cast<std::size_t>(lv.offset + fl)] * inv : 0.0;
            if (k > lat.top_level()) {
                const index_t p = lat.parent_flat(k, fl);
                if (p >= 0) s += run[static_cast<std::size_t>(lat.level(k - 1).offset + p)];
            }
            run[static_cast<std::size_t>(lv.offset + fl)] = s;
        }
    }
    std::vector<double> field(static_cast<std::size_t>(spec.cell_count()));
    const auto& leaf = lat.level(n);
    for (index_t c = 0; c < spec.cell_count(); ++c)
        field[static_cast<std::size_t>(c)] =
            run[static_cast<std::size_t>(leaf.offset + lat.leaf_of_cell(c))];
    return {spec, std::move(field), "dyadic-riesz"};
}

CombinedRiesz riesz_combined(const DiscreteMeasure& mu, const RieszParams& params,
                             int depth_margin) {
    const RootSpec& spec = mu.spec();
    params.validate(spec.dim);
    CombinedRiesz out;
    out.max_form = {spec, std::vector<double>(static_cast<std::size_t>(spec.cell_count()), 0.0),
                    "riesz-combined-max"};
    out.sum_form = {spec, std::vector<double>(static_cast<std::size_t>(spec.cell_count()), 0.0),
                    "riesz-combined-sum"};
    for (const Lattice& lat : shifted_lattices(spec, depth_margin)) {
        const OperatorField one = dyadic_riesz(mu, params, lat);
        for (index_t c = 0; c < spec.cell_count(); ++c) {
            auto& mx = out.max_form.values[static_cast<std::size_t>(c)];
            mx = std::max(mx, one[c]);
            out.sum_form.values[static_cast<std::size_t>(c)] += one[c];
        }
    }
    return out;
}

GoodLambdaRieszEvaluator::GoodLambdaRieszEvaluator(const DiscreteMeasure& mu, double alpha,
                                                   double beta, const Lattice& lat,
                                                   bool force_beta)
    : beta_(beta) {
    RieszParams params{alpha};
    params.validate(mu.spec().dim);
    ContentParams{beta}.validate(mu.spec().dim);
    if (!force_beta && !params.beta_admissible(beta, mu.spec().dim))
        throw std::invalid_argument(
            "goodlambda_riesz_check: beta must lie in (dim - alpha, dim]; pass force_beta for "
            "exploratory runs");
    potential_ = dyadic_riesz(mu, params, lat);
    frac_max_ = fractional_maximal(mu, alpha);
}

GoodLambdaRiesz GoodLambdaRieszEvaluator::eval(double lambda, double eps) const {
    if (!(lambda > 0.0)) throw std::invalid_argument("goodlambda_riesz_check: lambda must be positive");
    if (!(eps > 0.0) || !(eps < 1.0))
        throw std::invalid_argument("goodlambda_riesz_check: eps must lie in (0, 1)");
    const ContentParams params{beta_};
    const RootSpec& spec = potential_.spec;
    GoodLambdaRiesz r;
    r.lambda = lambda;
    r.eps = eps;
    CellSet s(spec);
    for (index_t c = 0; c < spec.cell_count(); ++c)
        if (potential_[c] > 2.0 * lambda && frac_max_[c] <= eps * lambda) s.add(c);
    r.lhs = content(s, params);
    r.g_lambda = content(potential_.superlevel(lambda), params);
    r.ratio = r.g_lambda > 0.0 ? r.lhs / r.g_lambda : 0.0;
    return r;
}

GoodLambdaRiesz goodlambda_riesz_check(const DiscreteMeasure& mu, double alpha, double beta,
                                       double lambda, double eps, const Lattice& lat,
                                       bool force_beta) {
    return GoodLambdaRieszEvaluator(mu, alpha, beta, lat, force_beta).eval(lambda, eps);
}

} // namespace hct
