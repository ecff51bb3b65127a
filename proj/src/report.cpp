#include "flopscope/report.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "flopscope/persistence.hpp"

namespace flopscope {

PlotSeries emit_scatter(const std::vector<Verdict>& anomalies) {
  PlotSeries s;
  s.kind = PlotKind::ScatterTimeVsFlop;
  s.name = "scatter_time_vs_flop";
  s.columns = {"flop_score", "time_score"};
  for (const Verdict& v : anomalies) {
    if (!v.is_anomaly) throw std::invalid_argument("emit_scatter: verdict is not an anomaly");
    s.points.push_back({v.flop_score, v.time_score});
  }
  return s;
}

PlotSeries emit_thickness_histogram(const std::vector<Region>& regions, int dimension_index,
                                    std::int64_t bin_width) {
  if (bin_width < 1) throw std::invalid_argument("bin_width must be >= 1");
  PlotSeries s;
  s.kind = PlotKind::ThicknessHistogram;
  s.name = "thickness_d" + std::to_string(dimension_index);
  s.columns = {"bin_low", "bin_high", "count"};

  std::map<std::int64_t, std::int64_t> bins;  // bin start -> count
  for (const Region& r : regions) {
    if (r.dimension_index != dimension_index) continue;
    if (r.thickness < 0) throw std::invalid_argument("negative region thickness");
    ++bins[r.thickness / bin_width * bin_width];
  }
  for (const auto& [low, count] : bins)
    s.points.push_back({static_cast<double>(low), static_cast<double>(low + bin_width),
                        static_cast<double>(count)});
  return s;
}

namespace {

std::string annotation_for(const Verdict& v, int algorithm_id) {
  const bool cheapest =
      std::find(v.cheapest_ids.begin(), v.cheapest_ids.end(), algorithm_id) != v.cheapest_ids.end();
  const bool fastest =
      std::find(v.fastest_ids.begin(), v.fastest_ids.end(), algorithm_id) != v.fastest_ids.end();
  if (cheapest && fastest) return "both";
  if (cheapest) return "cheapest";
  if (fastest) return "fastest";
  return "neither";
}

}  // namespace

std::vector<PlotSeries> emit_efficiency_lines(const LineTraversal& line,
                                              const std::string& name_prefix) {
  if (line.samples.empty()) throw std::invalid_argument("emit_efficiency_lines: no samples");
  const std::vector<AlgorithmTiming>& first = line.samples.front().timings;
  if (first.empty())
    throw std::invalid_argument("emit_efficiency_lines: samples carry no per-step timings");

  std::vector<PlotSeries> all;
  for (size_t a = 0; a < first.size(); ++a) {
    const int id = first[a].algorithm_id;
    PlotSeries s;
    s.kind = PlotKind::EfficiencyLine;
    s.name = name_prefix + "_alg" + std::to_string(id);
    s.columns = {"position", "algorithm"};
    for (size_t k = 0; k < first[a].per_step.size(); ++k)
      s.columns.push_back("step" + std::to_string(k + 1));

    for (const LineSample& sample : line.samples) {
      if (sample.timings.size() != first.size())
        throw std::invalid_argument("emit_efficiency_lines: missing per-step data");
      const AlgorithmTiming& t = sample.timings[a];
      if (t.per_step.size() != first[a].per_step.size())
        throw std::invalid_argument("emit_efficiency_lines: missing per-step data");
      std::vector<double> row{static_cast<double>(sample.position), t.total.efficiency};
      for (const TimingSample& step : t.per_step) row.push_back(step.efficiency);
      s.points.push_back(std::move(row));
      s.annotations.push_back(annotation_for(sample.verdict, id));
    }
    all.push_back(std::move(s));
  }
  return all;
}

std::string plot_series_to_csv(const std::string& run_id, const PlotSeries& series) {
  std::string out = "run_id";
  for (const std::string& c : series.columns) out += ',' + c;
  const bool annotated = !series.annotations.empty();
  if (annotated) {
    out += ",annotation";
    if (series.annotations.size() != series.points.size())
      throw std::invalid_argument("plot series annotation count mismatch");
  }
  out += '\n';
  for (size_t i = 0; i < series.points.size(); ++i) {
    out += run_id;
    for (double v : series.points[i]) out += ',' + fmt_double(v);
    if (annotated) out += ',' + series.annotations[i];
    out += '\n';
  }
  return out;
}

}  // namespace flopscope
