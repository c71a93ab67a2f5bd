#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hct/choquet.hpp"
#include "hct/grid.hpp"
#include "hct/measure.hpp"

namespace hct::harness {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// deterministic input generators (bit-stable for a fixed seed)

struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next();                    // splitmix64
    double uniform();                        // [0, 1)
    double uniform(double lo, double hi);
    index_t below(index_t n);
};

std::uint64_t subseed(std::uint64_t master, std::uint64_t idx);

/// Self-similar dust: every kept cube keeps `branching` children per level.
/// Choices are drawn level-major, so shallower materializations are prefixes
/// of deeper ones. dust_depth < 0 draws choices down to the finest level;
/// otherwise cubes at dust_depth are filled solid.
CellSet generate_dust(const RootSpec& spec, int branching, std::uint64_t seed,
                      int dust_depth = -1);

/// Step function with `levels` representative values assigned on the cells of
/// a coarse level (default min(4, depth)) and lifted; the same seed yields the
/// same function at any depth >= coarse_level.
GridFunction generate_random_step(const RootSpec& spec, int levels, std::uint64_t seed,
                                  int coarse_level = -1);

/// Point atoms at dyadic positions (denominator 2^20, off every cell center
/// for depth <= 19), masses uniform in [0.5, 1.5] scaled to total mass one.
DiscreteMeasure generate_atom_cloud(const RootSpec& spec, int count, std::uint64_t seed);

/// Density built from an atom cloud: each atom's mass spread uniformly over
/// its coarse-level cell.
GridFunction generate_atom_density(const RootSpec& spec, int count, std::uint64_t seed,
                                   int coarse_level = -1);

/// Unit mass spread uniformly along the codimension-one sheet {x_0 = const},
/// discretized to the row of cells containing it.
DiscreteMeasure generate_plane_measure(const RootSpec& spec, std::uint64_t seed);

/// Unit mass spread uniformly over a sup-norm ball that fits inside the root.
DiscreteMeasure generate_uniform_ball(const RootSpec& spec, double radius, std::uint64_t seed);

struct Generated {
    std::optional<CellSet> set;
    std::optional<GridFunction> fn;
    std::optional<DiscreteMeasure> measure;
};

/// Dispatch by kind: dyadic-dust, random-step, atom-cloud, atom-density,
/// plane-measure, uniform-ball. Unknown kinds throw.
Generated generate(const RootSpec& spec, const std::string& kind, const json& params,
                   std::uint64_t seed);

// ---------------------------------------------------------------------------
// experiments

struct ExperimentConfig {
    std::string experiment;
    RootSpec grid{2, 7};
    std::uint64_t seed = 1;
    int jobs = 0; // 0: default worker count
    json params = json::object();
    json tolerances = json::object();
};

ExperimentConfig parse_config(const json& j);
/// A config file holds one config object or an array of them.
std::vector<ExperimentConfig> load_config_file(const std::string& path);
const std::vector<std::string>& experiment_names();

struct Case {
    std::string id;
    json params = json::object();
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    json metrics = json::object();
    std::string verdict = "pass"; // pass | fail | skip
    std::string note;
};

struct PlotSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

struct Plot {
    std::string title, x_label, y_label;
    std::vector<PlotSeries> series;
};

struct Report {
    json config_echo;
    std::vector<Case> cases;
    json summary = json::object();
    std::vector<Plot> plots;
    double wall_ms = 0.0;
    bool passed() const;
};

Report run(const ExperimentConfig& config);

std::string emit_json(const Report& report);
std::string emit_csv(const Report& report);
std::string emit_svg(const Plot& plot);
/// Writes report.json, report.csv and one SVG per sweep plot into out_dir.
void write_report(const Report& report, const std::string& out_dir);

// least-squares line fit with the one-sided 95% test on the slope sign
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    int dof = 0;
    bool slope_negative_95() const;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);
/// Common-slope fit with one intercept per group (within transformation).
LineFit fit_line_grouped(std::span<const double> x, std::span<const double> y,
                         std::span<const int> group, int group_count);

} // namespace hct::harness
