// experiments.hpp
//
// The three experiment drivers: random anomaly search over an integer box,
// axis-aligned line traversal around anomalies (regions, holes, thickness),
// and anomaly prediction from isolated kernel benchmarks, evaluated with
// confusion matrices.

#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "flopscope/anomaly.hpp"
#include "flopscope/backend.hpp"
#include "flopscope/expr.hpp"

namespace flopscope {

struct SearchSpace {
  std::vector<Dim> lower;  // per dimension
  std::vector<Dim> upper;
  int step = 10;  // traversal stride

  static SearchSpace box(int dim_count, Dim lo = 20, Dim hi = 1200, int step = 10);
  void validate(int dim_count) const;
};

struct RandomSearchConfig {
  std::uint64_t rng_seed = 0;
  int target_anomalies = 100;
  int max_samples = 100000;
  Thresholds thresholds;

  void validate() const;
};

struct RandomSearchResult {
  std::vector<Verdict> verdicts;      // every sample, in draw order
  std::vector<int> anomaly_indices;   // indices into verdicts
  int sample_count = 0;
  bool reached_target = false;        // false: stopped by max_samples (partial)

  double abundance() const {
    return sample_count == 0 ? 0.0 : static_cast<double>(anomaly_indices.size()) / sample_count;
  }
};

// Samples instances i.i.d. uniformly over the box (with replacement),
// measures every algorithm, classifies, and stops at target_anomalies or
// max_samples. Exhausting max_samples is a partial result, not an error.
RandomSearchResult random_search(const ExpressionKind& kind, const SearchSpace& space,
                                 const RandomSearchConfig& config, Backend& backend,
                                 const MeasurementProtocol& protocol);

// An anomalous interval along one axis-aligned line. Boundaries a < b are
// dimension values; thickness = b - a - 1; holes are the non-anomalous
// sampled positions strictly inside (a, b) (runs of length <= 2).
struct Region {
  Instance origin;
  int dimension_index = 0;
  Dim a = 0, b = 0;
  std::int64_t thickness = 0;
  std::vector<Dim> holes;
  bool hit_space_boundary_low = false;
  bool hit_space_boundary_high = false;
};

struct LineSample {
  Dim position = 0;
  Verdict verdict;
  std::vector<AlgorithmTiming> timings;  // per algorithm, with per-step samples
};

struct LineTraversal {
  Region region;
  std::vector<LineSample> samples;  // ascending by position
};

struct TraversalOptions {
  // Extra positions sampled past the stopping rule, recorded but not
  // extending the region.
  int overshoot = 0;
};

// Thrown when a traversal origin fails to classify as an anomaly at the
// traversal threshold.
struct OriginNotAnomalous : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Classification (plus timing detail) of the instance at one line position.
using LineClassifier =
    std::function<std::pair<Verdict, std::vector<AlgorithmTiming>>(const Instance&)>;

// Core traversal logic, decoupled from measurement so the stopping rules
// can be tested against scripted label sequences. Walks both directions in
// strides of space.step; a direction ends at the third consecutive
// non-anomaly (boundary = first of the three) or at the space bound
// (boundary = last sampled position). Throws if the origin does not
// classify as an anomaly.
LineTraversal traverse_line_with(const Instance& origin, int dimension_index,
                                 const SearchSpace& space, const LineClassifier& classify_at,
                                 const TraversalOptions& options = {});

LineTraversal traverse_line(const Instance& origin, int dimension_index, const SearchSpace& space,
                            Backend& backend, const MeasurementProtocol& protocol,
                            const Thresholds& thresholds, const TraversalOptions& options = {});

// One traversal per dimension of the origin instance.
std::vector<LineTraversal> explore_regions(const Instance& origin, const SearchSpace& space,
                                           Backend& backend, const MeasurementProtocol& protocol,
                                           const Thresholds& thresholds,
                                           const TraversalOptions& options = {});

struct PredictionResult {
  std::vector<Verdict> verdicts;       // one per input instance, same order
  std::size_t distinct_calls = 0;      // kernel calls benchmarked after dedup
};

// Benchmarks every distinct kernel call appearing in any algorithm of any
// input instance exactly once (isolated, flushed), predicts each
// algorithm's time as the sum of its calls' medians, and classifies the
// predictions with the ordinary rules.
PredictionResult predict_from_benchmarks(const std::vector<Instance>& instances, Backend& backend,
                                         const MeasurementProtocol& protocol,
                                         const Thresholds& thresholds);

struct ConfusionMatrix {
  std::int64_t tn = 0, fp = 0, fn = 0, tp = 0;
  std::int64_t total() const { return tn + fp + fn + tp; }
};

// Standard 2x2 counts: actual on rows, predicted on columns.
ConfusionMatrix confusion(const std::vector<bool>& actual, const std::vector<bool>& predicted);

struct Metrics {
  double recall = 0.0;
  double precision = 0.0;
  bool recall_defined = false;     // tp + fn > 0
  bool precision_defined = false;  // tp + fp > 0
};

Metrics metrics(const ConfusionMatrix& cm);

// Measures all algorithms of the instance and classifies the result.
std::pair<Verdict, std::vector<AlgorithmTiming>> classify_instance(
    const Instance& inst, const std::vector<Algorithm>& algorithms, Backend& backend,
    const MeasurementProtocol& protocol, const Thresholds& thresholds);

}  // namespace flopscope
