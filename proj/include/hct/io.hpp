#pragma once

#include <string>
#include <utility>
#include <vector>

#include "hct/choquet.hpp"
#include "hct/grid.hpp"
#include "hct/measure.hpp"

namespace hct::io {

// Cell sets. Text: header "d n L origin...", then one "k i1 ... id" line per
// member finest cell (k is the finest level). Binary: magic "HCTS", u64 dim,
// u64 depth, f64 side, f64 origin[dim], u64 run count, then alternating
// little-endian u64 run lengths over the flat cell order, zeros first.
void write_cellset_text(const std::string& path, const CellSet& set);
CellSet read_cellset_text(const std::string& path);
void write_cellset_rle(const std::string& path, const CellSet& set);
CellSet read_cellset_rle(const std::string& path);
/// Sniffs the HCTS magic and dispatches.
CellSet read_cellset(const std::string& path);

// Grid functions. CSV: header line "d,n,L", then row-major values, one row of
// 2^n comma-separated entries per line. Binary: magic "HCTF", u64 dim,
// u64 depth, f64 side, then 2^(dim*depth) little-endian f64 values.
void write_function_csv(const std::string& path, const GridFunction& f);
GridFunction read_function_csv(const std::string& path);
void write_function_binary(const std::string& path, const GridFunction& f);
GridFunction read_function_binary(const std::string& path);
/// Sniffs the HCTF magic and dispatches.
GridFunction read_function(const std::string& path);

// Measures. Header "d n L origin...", then "cell-index mass" lines (flat
// row-major index) and "atom x1 ... xd mass" lines.
void write_measure_csv(const std::string& path, const DiscreteMeasure& mu);
DiscreteMeasure read_measure_csv(const std::string& path);

// Cube families (one lattice). Header "d n L origin...", a "shift MASK" line,
// then "k m1 ... md" lines.
void write_family(const std::string& path, const RootSpec& spec,
                  const std::vector<DyadicCube>& cubes);
std::pair<RootSpec, std::vector<DyadicCube>> read_family(const std::string& path);

} // namespace hct::io
