#pragma once

#include <vector>

#include "hct/choquet.hpp"
#include "hct/grid.hpp"
#include "hct/operators.hpp"

namespace hct {

struct CZCertificate {
    bool union_matches = false;   // union of the cubes equals {M f > lambda} cell for cell
    bool maximality = false;      // no selected cube sits inside a larger cube contained in the level set
    bool average_bounds = false;  // lambda < a_k <= 2^beta * lambda for every cube
    bool outside_bound = false;   // f <= lambda on every cell off the union
    bool all() const { return union_matches && maximality && average_bounds && outside_bound; }
};

/// Maximal non-overlapping dyadic cubes tiling {M_dyadic f > lambda}, with
/// their content averages and the verified certificate.
struct CZDecomposition {
    double lambda = 0.0;
    double beta = 0.0;
    std::vector<DyadicCube> cubes;     // level-major, lexicographic
    std::vector<double> averages;      // a_k = integral over Q_k / side^beta
    CZCertificate certificate;
};

/// Throws RootSaturatedError when lambda is below the root average of f
/// (the two-sided bound would have no parent cube to certify against).
CZDecomposition cz_decompose(const GridFunction& f, double beta, double lambda);

struct PackingCertificate {
    bool coverage = false;          // family ⊆ selected ∪ ancestors
    bool packing_bound = false;     // sum_{selected ⊆ Q} side^beta <= 2 side(Q)^beta, all cubes Q
    bool ancestor_lower = false;    // side(A)^beta <= sum_{selected ⊆ A} side^beta per ancestor A
    bool content_sandwich = false;  // content(U) <= mixed cover cost <= sum(selected) <= 2 content(U)
    bool all() const { return coverage && packing_bound && ancestor_lower && content_sandwich; }
};

struct PackingSelection {
    std::vector<DyadicCube> family;
    std::vector<DyadicCube> selected;
    std::vector<DyadicCube> ancestors;
    double selected_cost = 0.0;    // sum of side^beta over the selected subfamily
    double mixed_cover_cost = 0.0; // selected outside ancestors, plus the ancestors
    double union_content = 0.0;    // min-cover content of the family union
    PackingCertificate certificate;
};

/// Greedy packing selection over a non-overlapping family from one lattice,
/// in non-increasing side order (ties lexicographic). A cube is accepted when
/// adding its cost keeps every ancestor's selected sum within twice that
/// ancestor's cost; the first (deepest) violating ancestor is promoted and
/// its remaining descendants are skipped. Throws on overlapping input.
PackingSelection packing_select(const RootSpec& spec, const std::vector<DyadicCube>& family,
                                double beta);

struct GoodLambdaSharp {
    double t = 0.0;
    double A = 0.0;
    double mu_t = 0.0;       // content({M f > t})
    double sharp_term = 0.0; // content({M# f > t/A})
    double mu_low = 0.0;     // content({M f > 2^{-beta-2} t})
    double rhs8 = 0.0;       // sharp_term + (8/A)  * mu_low
    double rhs16 = 0.0;      // sharp_term + (16/A) * mu_low
    double margin8 = 0.0;    // rhs8 - mu_t
    double margin16 = 0.0;   // rhs16 - mu_t
};

/// Precomputes the dyadic maximal and sharp fields once, then evaluates the
/// good-lambda inequality at any (t, A).
class GoodLambdaSharpEvaluator {
public:
    GoodLambdaSharpEvaluator(const GridFunction& f, double beta,
                             CPolicy policy = CPolicy::AllPairwiseMidpoints);
    GoodLambdaSharp eval(double t, double A) const;
    const OperatorField& maximal() const { return maximal_; }
    const OperatorField& sharp() const { return sharp_; }

private:
    double beta_;
    OperatorField maximal_;
    OperatorField sharp_;
};

GoodLambdaSharp goodlambda_sharp_check(const GridFunction& f, double beta, double t, double A,
                                       CPolicy policy = CPolicy::AllPairwiseMidpoints);

} // namespace hct
