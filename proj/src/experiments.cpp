#include "flopscope/experiments.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <stdexcept>
#include <tuple>

#include "flopscope/measure.hpp"

namespace flopscope {

SearchSpace SearchSpace::box(int dim_count, Dim lo, Dim hi, int step) {
  SearchSpace s;
  s.lower.assign(static_cast<size_t>(dim_count), lo);
  s.upper.assign(static_cast<size_t>(dim_count), hi);
  s.step = step;
  return s;
}

void SearchSpace::validate(int dim_count) const {
  if (static_cast<int>(lower.size()) != dim_count || static_cast<int>(upper.size()) != dim_count)
    throw std::invalid_argument("search space bounds must cover every dimension");
  for (size_t i = 0; i < lower.size(); ++i) {
    if (lower[i] < 1) throw std::invalid_argument("search space lower bound must be >= 1");
    if (lower[i] > upper[i]) throw std::invalid_argument("search space requires lower <= upper");
  }
  if (step < 1) throw std::invalid_argument("search space step must be >= 1");
}

void RandomSearchConfig::validate() const {
  thresholds.validate();
  if (target_anomalies < 1) throw std::invalid_argument("target_anomalies must be >= 1");
  if (max_samples < target_anomalies)
    throw std::invalid_argument("max_samples must be >= target_anomalies");
}

std::pair<Verdict, std::vector<AlgorithmTiming>> classify_instance(
    const Instance& inst, const std::vector<Algorithm>& algorithms, Backend& backend,
    const MeasurementProtocol& protocol, const Thresholds& thresholds) {
  std::vector<AlgorithmTiming> timings;
  std::vector<AlgorithmResult> results;
  timings.reserve(algorithms.size());
  results.reserve(algorithms.size());
  for (const Algorithm& alg : algorithms) {
    AlgorithmTiming t = measure_algorithm(backend, alg, inst, protocol);
    results.push_back({alg.id, t.total.flops, t.total.median_seconds, t.total.efficiency});
    timings.push_back(std::move(t));
  }
  return {classify(inst, std::move(results), thresholds), std::move(timings)};
}

RandomSearchResult random_search(const ExpressionKind& kind, const SearchSpace& space,
                                 const RandomSearchConfig& config, Backend& backend,
                                 const MeasurementProtocol& protocol) {
  space.validate(kind.dim_count());
  config.validate();
  const std::vector<Algorithm> algorithms = enumerate_algorithms(kind);

  std::mt19937_64 rng(config.rng_seed);
  std::vector<std::uniform_int_distribution<Dim>> draw;
  for (size_t d = 0; d < space.lower.size(); ++d) draw.emplace_back(space.lower[d], space.upper[d]);

  RandomSearchResult result;
  while (static_cast<int>(result.anomaly_indices.size()) < config.target_anomalies &&
         result.sample_count < config.max_samples) {
    std::vector<Dim> dims(draw.size());
    for (size_t d = 0; d < draw.size(); ++d) dims[d] = draw[d](rng);
    Instance inst(kind, std::move(dims));

    auto [verdict, timings] = classify_instance(inst, algorithms, backend, protocol, config.thresholds);
    ++result.sample_count;
    if (verdict.is_anomaly) result.anomaly_indices.push_back(static_cast<int>(result.verdicts.size()));
    result.verdicts.push_back(std::move(verdict));
  }
  result.reached_target = static_cast<int>(result.anomaly_indices.size()) >= config.target_anomalies;
  return result;
}

namespace {

Instance at_position(const Instance& origin, int dimension_index, Dim position) {
  std::vector<Dim> dims = origin.dims;
  dims[static_cast<size_t>(dimension_index)] = position;
  return Instance(origin.kind, std::move(dims));
}

}  // namespace

LineTraversal traverse_line_with(const Instance& origin, int dimension_index,
                                 const SearchSpace& space, const LineClassifier& classify_at,
                                 const TraversalOptions& options) {
  space.validate(origin.kind.dim_count());
  if (dimension_index < 0 || dimension_index >= origin.kind.dim_count())
    throw std::invalid_argument("dimension index out of range");
  const Dim lo = space.lower[static_cast<size_t>(dimension_index)];
  const Dim hi = space.upper[static_cast<size_t>(dimension_index)];
  const Dim origin_pos = origin.dims[static_cast<size_t>(dimension_index)];
  if (origin_pos < lo || origin_pos > hi)
    throw std::invalid_argument("origin lies outside the search space");

  std::vector<LineSample> samples;
  auto classify_pos = [&](Dim pos) -> bool {
    auto [verdict, timings] = classify_at(at_position(origin, dimension_index, pos));
    const bool anomalous = verdict.is_anomaly;
    samples.push_back({pos, std::move(verdict), std::move(timings)});
    return anomalous;
  };

  if (!classify_pos(origin_pos)) throw OriginNotAnomalous("origin not an anomaly");

  // Walks one direction. Stops at the third consecutive non-anomaly (the
  // first of those three is the boundary) or at the space bound (the last
  // sampled position is the boundary, whatever its label).
  auto walk = [&](int sign, bool& hit_bound) -> Dim {
    Dim last_sampled = origin_pos;
    Dim first_of_run = 0;
    int consecutive = 0;
    for (Dim pos = origin_pos + sign * space.step; pos >= lo && pos <= hi;
         pos += sign * space.step) {
      last_sampled = pos;
      if (classify_pos(pos)) {
        consecutive = 0;
        continue;
      }
      if (++consecutive == 1) first_of_run = pos;
      if (consecutive == 3) {
        for (int extra = 1; extra <= options.overshoot; ++extra) {
          const Dim p = pos + sign * extra * space.step;
          if (p < lo || p > hi) break;
          classify_pos(p);
        }
        return first_of_run;
      }
    }
    hit_bound = true;
    return last_sampled;
  };

  Region region{origin, dimension_index, 0, 0, 0, {}, false, false};
  region.b = walk(+1, region.hit_space_boundary_high);
  region.a = walk(-1, region.hit_space_boundary_low);
  region.thickness = region.b - region.a - 1;

  std::sort(samples.begin(), samples.end(),
            [](const LineSample& x, const LineSample& y) { return x.position < y.position; });
  for (const LineSample& s : samples)
    if (s.position > region.a && s.position < region.b && !s.verdict.is_anomaly)
      region.holes.push_back(s.position);

  return LineTraversal{std::move(region), std::move(samples)};
}

LineTraversal traverse_line(const Instance& origin, int dimension_index, const SearchSpace& space,
                            Backend& backend, const MeasurementProtocol& protocol,
                            const Thresholds& thresholds, const TraversalOptions& options) {
  const std::vector<Algorithm> algorithms = enumerate_algorithms(origin.kind);
  return traverse_line_with(
      origin, dimension_index, space,
      [&](const Instance& inst) {
        return classify_instance(inst, algorithms, backend, protocol, thresholds);
      },
      options);
}

std::vector<LineTraversal> explore_regions(const Instance& origin, const SearchSpace& space,
                                           Backend& backend, const MeasurementProtocol& protocol,
                                           const Thresholds& thresholds,
                                           const TraversalOptions& options) {
  std::vector<LineTraversal> lines;
  for (int d = 0; d < origin.kind.dim_count(); ++d)
    lines.push_back(traverse_line(origin, d, space, backend, protocol, thresholds, options));
  return lines;
}

PredictionResult predict_from_benchmarks(const std::vector<Instance>& instances, Backend& backend,
                                         const MeasurementProtocol& protocol,
                                         const Thresholds& thresholds) {
  PredictionResult result;
  if (instances.empty()) return result;

  const ExpressionKind kind = instances.front().kind;
  for (const Instance& inst : instances)
    if (!(inst.kind == kind))
      throw std::invalid_argument("prediction samples must share one expression kind");
  const std::vector<Algorithm> algorithms = enumerate_algorithms(kind);

  // Distinct calls are identified by shape alone: kind, transposes, sizes.
  using CallKey = std::tuple<StepKind, bool, bool, Dim, Dim, Dim>;
  auto key_of = [](const Step& s) {
    return CallKey{s.kind, s.transpose_a, s.transpose_b, s.m, s.n, s.k};
  };
  std::map<CallKey, TimingSample> bench;

  for (const Instance& inst : instances)
    for (const Algorithm& alg : algorithms)
      for (const Step& step : bind_steps(alg, inst)) {
        const CallKey key = key_of(step);
        if (!bench.count(key)) bench.emplace(key, measure_call_isolated(backend, step, protocol));
      }
  result.distinct_calls = bench.size();

  for (const Instance& inst : instances) {
    std::vector<AlgorithmResult> predicted;
    predicted.reserve(algorithms.size());
    for (const Algorithm& alg : algorithms) {
      AlgorithmResult r{alg.id, 0, 0.0, 0.0};
      for (const Step& step : bind_steps(alg, inst)) {
        const TimingSample& sample = bench.at(key_of(step));
        r.flops += sample.flops;
        r.seconds += sample.median_seconds;
      }
      if (r.seconds > 0)
        r.efficiency = efficiency(r.flops, r.seconds, backend.machine().peak_flops);
      predicted.push_back(r);
    }
    result.verdicts.push_back(classify(inst, std::move(predicted), thresholds));
  }
  return result;
}

ConfusionMatrix confusion(const std::vector<bool>& actual, const std::vector<bool>& predicted) {
  if (actual.size() != predicted.size())
    throw std::invalid_argument("confusion: actual and predicted lengths differ");
  ConfusionMatrix cm;
  for (size_t i = 0; i < actual.size(); ++i) {
    if (actual[i] && predicted[i]) ++cm.tp;
    else if (actual[i] && !predicted[i]) ++cm.fn;
    else if (!actual[i] && predicted[i]) ++cm.fp;
    else ++cm.tn;
  }
  return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
  Metrics m;
  m.recall_defined = cm.tp + cm.fn > 0;
  m.precision_defined = cm.tp + cm.fp > 0;
  if (m.recall_defined) m.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  if (m.precision_defined)
    m.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  return m;
}

}  // namespace flopscope
