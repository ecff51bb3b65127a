// report.hpp
//
// Analysis artifacts as plain data series: score scatter, thickness
// histograms, and efficiency-vs-dimension lines with cheapest/fastest/both
// annotations. Emission produces data files only; rendering is left to
// whatever plotting front-end consumes them.

#pragma once

#include <string>
#include <vector>

#include "flopscope/anomaly.hpp"
#include "flopscope/experiments.hpp"

namespace flopscope {

enum class PlotKind { ScatterTimeVsFlop, ThicknessHistogram, EfficiencyLine };

struct PlotSeries {
  PlotKind kind = PlotKind::ScatterTimeVsFlop;
  std::string name;                          // file stem
  std::vector<std::string> columns;          // numeric columns, in order
  std::vector<std::vector<double>> points;   // one row per point
  std::vector<std::string> annotations;      // empty, or one label per point
};

// One (flop_score, time_score) point per anomaly. Throws if any verdict is
// not an anomaly.
PlotSeries emit_scatter(const std::vector<Verdict>& anomalies);

// Histogram of region thicknesses for one dimension index, over bins of
// the given width starting at 0; only occupied bins are emitted.
PlotSeries emit_thickness_histogram(const std::vector<Region>& regions, int dimension_index,
                                    std::int64_t bin_width = 50);

// Per algorithm: whole-algorithm efficiency plus per-step efficiencies
// along the line, annotated per sample with cheapest/fastest/both/neither.
// Requires per-step timing data on every sample.
std::vector<PlotSeries> emit_efficiency_lines(const LineTraversal& line,
                                              const std::string& name_prefix = "efficiency_line");

// plots/<name>.csv with columns run_id,<columns...>[,annotation].
std::string plot_series_to_csv(const std::string& run_id, const PlotSeries& series);

}  // namespace flopscope
