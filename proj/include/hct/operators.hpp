#pragma once

#include <string>
#include <vector>

#include "hct/choquet.hpp"
#include "hct/grid.hpp"
#include "hct/measure.hpp"

namespace hct {

/// Candidate grid for the inner minimization over c in the sharp maximal
/// family. AllPairwiseMidpoints is exact for step functions (the objective is
/// piecewise linear in c with breakpoints only at pairwise value midpoints);
/// AdjacentMidpoints is the cheaper default for whole-tree sweeps.
enum class CPolicy { AdjacentMidpoints, AllPairwiseMidpoints };

/// One value per finest cell, tagged with the operator that produced it.
struct OperatorField {
    RootSpec spec;
    std::vector<double> values;
    std::string provenance;

    double operator[](index_t cell) const { return values[static_cast<std::size_t>(cell)]; }
    index_t size() const { return static_cast<index_t>(values.size()); }
    double max_value() const;
    CellSet superlevel(double t) const; // {field > t}
    GridFunction as_function() const { return GridFunction(spec, values); }
};

/// Minimizer of c -> integral over Q of |f - c| against the lattice content.
struct BestC {
    DyadicCube cube;
    double c = 0.0;
    double value = 0.0;
};

/// Dyadic maximal function: per cell, max over base-lattice ancestors Q of
/// integral(f over Q) / side(Q)^beta.
OperatorField dyadic_maximal(const GridFunction& f, double beta);

/// Ball-based maximal proxy: max of the per-lattice dyadic maximal over the
/// 2^dim shifted lattices (each lattice uses its own content in the averages).
OperatorField beta_maximal(const GridFunction& f, double beta, int depth_margin = 1);

BestC best_constant_c(const GridFunction& f, const DyadicCube& Q, double beta,
                      CPolicy policy = CPolicy::AllPairwiseMidpoints);

/// Dyadic sharp maximal: per cell, max over base-lattice ancestors of the
/// minimized mean oscillation best_constant_c(f, Q).value / side(Q)^beta.
OperatorField dyadic_sharp_maximal(const GridFunction& f, double beta,
                                   CPolicy policy = CPolicy::AdjacentMidpoints);

/// Cube-based sharp maximal proxy (max over shifted lattices), and the
/// centered variant which restricts, per cell x, to the cubes whose center
/// cell is x's cell.
OperatorField sharp_maximal(const GridFunction& f, double beta,
                            CPolicy policy = CPolicy::AdjacentMidpoints, int depth_margin = 1);
OperatorField centered_sharp_maximal(const GridFunction& f, double beta,
                                     CPolicy policy = CPolicy::AdjacentMidpoints,
                                     int depth_margin = 1);

/// Fractional maximal function of a measure: per cell, max over shifted-lattice
/// cubes Q containing the cell of mu(Q) / side(Q)^{dim-alpha}.
OperatorField fractional_maximal(const DiscreteMeasure& mu, double alpha, int depth_margin = 1);

/// sup over shifted-lattice cubes whose covered cells lie inside omega of the
/// minimized mean oscillation over side^beta.
double bmo_beta_norm(const GridFunction& u, const CellSet& omega, double beta,
                     CPolicy policy = CPolicy::AdjacentMidpoints, int depth_margin = 1);

struct MorreyNorm {
    double value = 0.0;
    std::vector<double> per_radius;    // sup over centers, coarse radius first
    bool fine_scale_divergence = false;
};

/// sup over cells x in omega and dyadic radii r = side*2^-k of
/// mu(B(x,r) ∩ omega) / r^beta, with B the open sup-norm ball and masses
/// counted at cell centers (atoms folded into their cells).
MorreyNorm morrey_norm(const DiscreteMeasure& mu, const CellSet& omega, double beta);

// Reference implementations along the plain Lebesgue path (direct volume-
// weighted sums, weighted-median oscillation). They agree with the content
// machinery exactly at beta = dim and are used as the classical comparison.
namespace classical {

OperatorField dyadic_maximal(const GridFunction& f);
OperatorField dyadic_sharp_maximal(const GridFunction& f);
OperatorField beta_maximal(const GridFunction& f, int depth_margin = 1);
OperatorField sharp_maximal(const GridFunction& f, int depth_margin = 1);
double lp_norm(const GridFunction& f, double p);
double measure_of(const CellSet& s);

} // namespace classical

} // namespace hct
