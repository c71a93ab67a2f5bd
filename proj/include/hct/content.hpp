#pragma once

#include <span>
#include <vector>

#include "hct/grid.hpp"
#include "hct/lattice_dp.hpp"

namespace hct {

/// Dimension parameter beta and reporting normalization. Internal arithmetic
/// is always raw dyadic (side^beta cover costs); ball-normalized mode scales
/// reported values by omega_beta = pi^{beta/2} / Gamma(beta/2 + 1).
struct ContentParams {
    double beta = 1.0;
    bool ball_normalized = false;

    void validate(int dim) const;
    double omega() const;
    double report_scale() const { return ball_normalized ? omega() : 1.0; }
};

/// Exact dyadic contents of E ∩ Q for every base-lattice cube Q at once.
class ContentTree {
public:
    ContentTree(RootSpec spec, ContentParams params);

    const RootSpec& spec() const { return base_.spec(); }
    const Lattice& lattice() const { return base_; }
    const ContentParams& params() const { return params_; }

    /// Raw dyadic value at a cube (no ball normalization).
    double raw_at(int level, index_t flat) const {
        return values_[static_cast<std::size_t>(base_.global_id(level, flat))];
    }
    double at(int level, index_t flat) const { return params_.report_scale() * raw_at(level, flat); }
    double at(const DyadicCube& q) const { return at(q.level, base_.flat_of_cube(q)); }
    double root() const { return at(0, 0); }
    std::span<const double> raw_values() const { return values_; }

private:
    friend ContentTree content_tree(const CellSet&, const ContentParams&);
    Lattice base_;
    ContentParams params_;
    std::vector<double> values_;
};

/// Bottom-up min-cover DP over the base dyadic tree D(Q0).
ContentTree content_tree(const CellSet& E, const ContentParams& params);

/// Dyadic Hausdorff content of E: the root value of the tree.
double content(const CellSet& E, const ContentParams& params);

/// Proxy for the ball-based content: minimum over the 2^dim one-third-shifted
/// lattices of the within-lattice min-cover value. Always <= content(E).
double content_proxy(const CellSet& E, const ContentParams& params, int depth_margin = 1);

/// Independent oracle: exact minimum of sum side^beta over ALL families of
/// base dyadic cubes covering E, by exhaustive branch-and-bound over covers.
/// Guarded to grids with at most 64 cells.
double brute_force_content(const CellSet& E, const ContentParams& params);

} // namespace hct
