#include "hct/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hct {

DiscreteMeasure::DiscreteMeasure(RootSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    cell_masses_.assign(static_cast<std::size_t>(spec_.cell_count()), 0.0);
}

DiscreteMeasure::DiscreteMeasure(RootSpec spec, std::vector<double> cell_masses,
                                 std::vector<Atom> atoms)
    : spec_(std::move(spec)), cell_masses_(std::move(cell_masses)) {
    spec_.validate();
    if (static_cast<index_t>(cell_masses_.size()) != spec_.cell_count())
        throw std::invalid_argument("DiscreteMeasure: mass count must match the cell count");
    for (double m : cell_masses_)
        if (!(m >= 0.0) || !std::isfinite(m))
            throw std::invalid_argument("DiscreteMeasure: masses must be nonnegative and finite");
    for (auto& a : atoms) add_atom(std::move(a));
}

void DiscreteMeasure::add_cell_mass(index_t cell, double mass) {
    if (cell < 0 || cell >= spec_.cell_count())
        throw std::out_of_range("DiscreteMeasure: cell index out of range");
    if (!(mass >= 0.0) || !std::isfinite(mass))
        throw std::invalid_argument("DiscreteMeasure: mass must be nonnegative and finite");
    cell_masses_[static_cast<std::size_t>(cell)] += mass;
}

void DiscreteMeasure::add_atom(Atom atom) {
    if (static_cast<int>(atom.position.size()) != spec_.dim)
        throw std::invalid_argument("DiscreteMeasure: atom position dimension mismatch");
    if (!(atom.mass > 0.0) || !std::isfinite(atom.mass))
        throw std::invalid_argument("DiscreteMeasure: atom mass must be positive and finite");
    for (int a = 0; a < spec_.dim; ++a) {
        const double x = atom.position[static_cast<std::size_t>(a)];
        const double lo = spec_.origin_at(a);
        if (!(x >= lo) || !(x <= lo + spec_.side))
            throw std::invalid_argument("DiscreteMeasure: atom outside the closed root cube");
    }
    atoms_.push_back(std::move(atom));
}

index_t DiscreteMeasure::cell_of_point(std::span<const double> x) const {
    const index_t per = spec_.cells_per_axis();
    index_t cell = 0;
    for (int a = 0; a < spec_.dim; ++a) {
        const double rel = (x[static_cast<std::size_t>(a)] - spec_.origin_at(a)) / spec_.side;
        index_t j = static_cast<index_t>(std::floor(rel * static_cast<double>(per)));
        j = std::clamp<index_t>(j, 0, per - 1);
        cell = (cell << spec_.depth) | j;
    }
    return cell;
}

std::vector<double> DiscreteMeasure::folded_cell_masses() const {
    std::vector<double> m = cell_masses_;
    for (const Atom& a : atoms_)
        m[static_cast<std::size_t>(cell_of_point(a.position))] += a.mass;
    return m;
}

double DiscreteMeasure::total_mass() const {
    double t = 0.0;
    for (double m : cell_masses_) t += m;
    for (const Atom& a : atoms_) t += a.mass;
    return t;
}

DiscreteMeasure DiscreteMeasure::scaled(double a) const {
    if (!(a >= 0.0) || !std::isfinite(a))
        throw std::invalid_argument("DiscreteMeasure: scale must be nonnegative");
    DiscreteMeasure out(spec_);
    out.cell_masses_ = cell_masses_;
    for (auto& m : out.cell_masses_) m *= a;
    out.atoms_ = atoms_;
    for (auto& at : out.atoms_) at.mass *= a;
    std::erase_if(out.atoms_, [](const Atom& at) { return at.mass == 0.0; });
    return out;
}

} // namespace hct
