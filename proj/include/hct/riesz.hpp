#pragma once

#include <limits>

#include "hct/grid.hpp"
#include "hct/measure.hpp"
#include "hct/operators.hpp"

namespace hct {

struct RieszParams {
    double alpha = 1.0;
    int k_min = 0;                                  // coarsest level entering dyadic sums
    int k_max = std::numeric_limits<int>::max();    // clamped to the finest level

    void validate(int dim) const;
    /// Normalization pi^{d/2} 2^alpha Gamma(alpha/2) / Gamma((d-alpha)/2).
    double gamma(int dim) const;
    /// Content dimensions pairing with this alpha must satisfy beta in (dim-alpha, dim].
    bool beta_admissible(double beta, int dim) const {
        return beta > static_cast<double>(dim) - alpha && beta <= static_cast<double>(dim);
    }
};

/// Mean of |z|^{alpha-dim} over the centered unit cube, computed by the
/// self-similar dyadic-annulus decomposition (the annulus integral is a
/// midpoint sum; the series over annuli is geometric with ratio 2^-alpha).
double kernel_cell_mean(int dim, double alpha);

/// Direct kernel summation: per cell center x,
///   gamma(alpha)^{-1} * sum of mass * |x - y|^{alpha - dim},
/// cell masses placed at cell centers, atoms at their exact positions. The
/// contribution of a source at the evaluation point itself (own-cell mass, or
/// an atom exactly at the center) uses the exact cell-averaged kernel instead
/// of the singular value.
OperatorField riesz_potential(const DiscreteMeasure& mu, const RieszParams& params);

/// Per cell: sum over lattice cubes containing it, levels k_min..k_max, of
/// mu(Q) / side(Q)^{dim - alpha}.
OperatorField dyadic_riesz(const DiscreteMeasure& mu, const RieszParams& params,
                           const Lattice& lat);

struct CombinedRiesz {
    OperatorField max_form; // per cell, max over the 2^dim shifted lattices
    OperatorField sum_form; // per cell, sum over the lattices
};

CombinedRiesz riesz_combined(const DiscreteMeasure& mu, const RieszParams& params,
                             int depth_margin = 1);

struct GoodLambdaRiesz {
    double lambda = 0.0;
    double eps = 0.0;
    double lhs = 0.0;      // content({I_D > 2 lambda, M_alpha <= eps lambda})
    double g_lambda = 0.0; // content({I_D > lambda})
    double ratio = 0.0;    // lhs / g_lambda, 0 when the denominator vanishes
};

/// Precomputes the dyadic potential and the fractional maximal field once,
/// then evaluates the exponential good-lambda quantities at any (lambda, eps).
class GoodLambdaRieszEvaluator {
public:
    GoodLambdaRieszEvaluator(const DiscreteMeasure& mu, double alpha, double beta,
                             const Lattice& lat, bool force_beta = false);
    GoodLambdaRiesz eval(double lambda, double eps) const;
    const OperatorField& potential() const { return potential_; }
    const OperatorField& frac_maximal() const { return frac_max_; }

private:
    double beta_;
    OperatorField potential_;
    OperatorField frac_max_;
};

/// Throws std::invalid_argument when beta <= dim - alpha unless force_beta.
GoodLambdaRiesz goodlambda_riesz_check(const DiscreteMeasure& mu, double alpha, double beta,
                                       double lambda, double eps, const Lattice& lat,
                                       bool force_beta = false);

} // namespace hct
