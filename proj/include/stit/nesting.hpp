#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "stit/geometry.hpp"
#include "stit/measure.hpp"
#include "stit/simulator.hpp"

namespace stit {

/// A finite tessellation of a convex window: cells with disjoint interiors.
struct Tessellation {
  Polytope window;
  std::vector<Polytope> cells;
};

// Live cells of a simulation state.
Tessellation to_tessellation(const TessellationState& state);

/// Cells in reference-point order: the cell containing the origin first,
/// then by distance of the centroid from the origin, ties broken
/// lexicographically by centroid coordinates.
struct NumberedTessellation {
  Polytope window;
  std::vector<Polytope> cells;
};

NumberedTessellation number_cells(const Tessellation& t);

// T (+) R: the k-th tessellation of `rs` clipped to the k-th cell of T.
// Throws DomainError when `rs` has fewer entries than T has cells.
Tessellation iterate(const NumberedTessellation& frame, std::span<const Tessellation> rs);

// x -> r x applied to every cell and the window.
Tessellation rescale(const Tessellation& t, double r);

// T n W': cells intersected with `w`, empty intersections dropped.
Tessellation restrict_to(const Tessellation& t, const Polytope& w);

/// Per-replicate summaries used for distribution comparisons.
struct TessellationSummary {
  double cell_count;
  double zero_cell_volume;  // NaN if no cell contains the origin
  double edge_length;       // total length of interior edges (2D only, else NaN)
};

TessellationSummary summarize(const Tessellation& t);

// Sum of cell volumes (coverage checks).
double total_volume(const Tessellation& t);

struct ComparisonRow {
  std::string comparison;  // e.g. "Y_t vs 2*Y_2t"
  std::string statistic;   // "cell_count", "zero_cell_area", "edge_length"
  double ks_d;
  double p_value;
  std::size_t n;
};

struct ComparisonReport {
  std::vector<ComparisonRow> rows;
  double min_p() const;
};

// Writes `comparison,statistic,ks_d,p_value,n` rows.
void write_csv(std::ostream& out, const ComparisonReport& report);

// Y_t n W compared with 2 (Y_2t n W/2), with 2 (Y_t n W/2 (+) Y'_t n W/2),
// and Y_{t+s} n W with Y_t n W (+) Y'_s n W. N replicates per sample.
ComparisonReport stit_property_test(const HyperplaneMeasure& m, const Window& w, double t,
                                    double s, std::size_t n, std::uint64_t master_seed,
                                    int threads = 0);

// (Y_t n W) n W' compared with a direct simulation of Y_t n W'.
ComparisonReport consistency_test(const HyperplaneMeasure& m, const Window& w,
                                  const Window& inner, double t, std::size_t n,
                                  std::uint64_t master_seed, int threads = 0);

// Y_t n W: a fresh simulation whose cells are clipped to `region` (cells
// missing int(region) are dropped during the run, which leaves the law of
// the clipped tessellation unchanged).
Tessellation simulate_clipped(const HyperplaneMeasure& m, const Polytope& window,
                              const Polytope& region, double t, RandomStream rng);

}  // namespace stit
