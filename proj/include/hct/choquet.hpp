#pragma once

#include <span>
#include <vector>

#include "hct/content.hpp"
#include "hct/grid.hpp"

namespace hct {

/// Nonnegative step function, one value per finest cell.
class GridFunction {
public:
    GridFunction(RootSpec spec, std::vector<double> values);
    static GridFunction constant(const RootSpec& spec, double c);
    static GridFunction indicator(const CellSet& set, double scale = 1.0);

    const RootSpec& spec() const { return spec_; }
    std::span<const double> values() const { return values_; }
    double operator[](index_t cell) const { return values_[static_cast<std::size_t>(cell)]; }
    index_t size() const { return static_cast<index_t>(values_.size()); }

    std::vector<double> distinct_values() const; // ascending
    double max_value() const;
    CellSet support() const;
    CellSet superlevel(double t) const; // {f > t}

private:
    RootSpec spec_;
    std::vector<double> values_;
};

/// Result of value quantization: representatives are empirical quantiles of
/// the data, each value maps to the nearest representative below it. In exact
/// mode (at most `levels` distinct values) the function is returned unchanged
/// and the error bound is zero. The bound is
///     (largest value drop) * content(support),
/// which dominates the integral defect of the quantized function.
struct Quantization {
    GridFunction fn;
    bool exact = true;
    double error_bound = 0.0;
};

Quantization quantize(const GridFunction& f, int levels, double beta);

/// Choquet integrals of f over every base-lattice cube at once.
class CubeIntegralTree {
public:
    CubeIntegralTree(RootSpec spec, double beta);

    const RootSpec& spec() const { return base_.spec(); }
    const Lattice& lattice() const { return base_; }
    double beta() const { return beta_; }
    double at(int level, index_t flat) const {
        return values_[static_cast<std::size_t>(base_.global_id(level, flat))];
    }
    double at(const DyadicCube& q) const { return at(q.level, base_.flat_of_cube(q)); }
    double root() const { return at(0, 0); }
    std::span<const double> values() const { return values_; }

private:
    friend CubeIntegralTree cube_integrals(const GridFunction&, double);
    Lattice base_;
    double beta_;
    std::vector<double> values_;
};

/// Layer-cake Choquet integral of f over `region` against the dyadic content:
/// sum over the sorted distinct values of (t_j - t_{j-1}) * content({f > t_{j-1}} ∩ region).
double integral(const GridFunction& f, const CellSet& region, double beta);
double integral(const GridFunction& f, double beta); // over the whole root

CubeIntegralTree cube_integrals(const GridFunction& f, double beta);

/// Per-cube layer-cake integrals over an arbitrary lattice (level-major array).
std::vector<double> lattice_cube_integrals(const Lattice& lat, const GridFunction& f, double beta);

double lp_norm(const GridFunction& f, double p, double beta);
double weak_lp_norm(const GridFunction& f, double p, double beta);

/// Integral of exp(gamma*f) over region, by layer cake on exp(gamma*f).
/// Throws ExpOverflowError (with the offending cell) if the exponential
/// leaves double range.
double exp_functional(const GridFunction& f, double gamma, const CellSet& region, double beta);

struct EmbeddingSides {
    double lhs = 0.0; // integral of f against the beta-content
    double rhs = 0.0; // (beta/alpha) * (integral of f^{alpha/beta} against the alpha-content)^{beta/alpha}
};

/// Both sides of the alpha <-> beta Choquet embedding, for the harness to
/// assert lhs <= rhs. Requires 0 < alpha <= beta <= dim.
EmbeddingSides embedding_check(const GridFunction& f, double alpha, double beta);

} // namespace hct
