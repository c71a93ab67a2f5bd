#pragma once

#include <span>
#include <vector>

#include "hct/grid.hpp"

namespace hct {

/// A point mass. Positions live in the closed root cube.
struct Atom {
    std::vector<double> position;
    double mass = 0.0;
};

/// Nonnegative masses attached to finest cells plus optional point atoms.
/// Cube and ball quantities fold every atom into the half-open cell containing
/// it (high-face atoms go to the last cell); kernel sums may use the exact
/// atom positions.
class DiscreteMeasure {
public:
    explicit DiscreteMeasure(RootSpec spec);
    DiscreteMeasure(RootSpec spec, std::vector<double> cell_masses, std::vector<Atom> atoms = {});

    const RootSpec& spec() const { return spec_; }
    std::span<const double> cell_masses() const { return cell_masses_; }
    const std::vector<Atom>& atoms() const { return atoms_; }

    void add_cell_mass(index_t cell, double mass);
    void add_atom(Atom atom);

    index_t cell_of_point(std::span<const double> x) const;
    /// Cell masses with all atoms folded in.
    std::vector<double> folded_cell_masses() const;
    double total_mass() const;

    DiscreteMeasure scaled(double a) const;

private:
    RootSpec spec_;
    std::vector<double> cell_masses_;
    std::vector<Atom> atoms_;
};

} // namespace hct
