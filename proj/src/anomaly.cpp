#include "flopscope/anomaly.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace flopscope {

void Thresholds::validate() const {
  if (!(time_score_threshold >= 0.0 && time_score_threshold < 1.0))
    throw std::invalid_argument("time_score_threshold must be in [0, 1)");
}

double time_score(double t_cheapest, double t_fastest) {
  if (!(t_fastest > 0)) throw std::invalid_argument("time_score: times must be > 0");
  if (t_fastest > t_cheapest)
    throw std::logic_error("time_score: fastest time exceeds cheapest time");
  return (t_cheapest - t_fastest) / t_cheapest;
}

double flop_score(FlopCount f_fastest, FlopCount f_cheapest) {
  if (f_cheapest <= 0) throw std::invalid_argument("flop_score: counts must be > 0");
  if (f_cheapest > f_fastest)
    throw std::logic_error("flop_score: cheapest count exceeds fastest count");
  return static_cast<double>(f_fastest - f_cheapest) / static_cast<double>(f_fastest);
}

Verdict classify(Instance inst, std::vector<AlgorithmResult> per_algorithm,
                 const Thresholds& thresholds) {
  thresholds.validate();
  if (per_algorithm.empty()) throw std::invalid_argument("classify: empty algorithm list");
  for (const AlgorithmResult& r : per_algorithm)
    if (!(r.seconds > 0)) throw std::invalid_argument("classify: all seconds must be > 0");

  FlopCount min_flops = per_algorithm.front().flops;
  double min_seconds = per_algorithm.front().seconds;
  for (const AlgorithmResult& r : per_algorithm) {
    min_flops = std::min(min_flops, r.flops);
    min_seconds = std::min(min_seconds, r.seconds);
  }

  Verdict v{std::move(inst), {}, {}, 0.0, 0.0, false, {}};
  double t_cheapest = std::numeric_limits<double>::infinity();
  FlopCount f_fastest = -1;
  for (const AlgorithmResult& r : per_algorithm) {
    if (r.flops == min_flops) {
      v.cheapest_ids.push_back(r.id);
      t_cheapest = std::min(t_cheapest, r.seconds);
    }
    if (r.seconds == min_seconds) {
      v.fastest_ids.push_back(r.id);
      f_fastest = f_fastest < 0 ? r.flops : std::min(f_fastest, r.flops);
    }
  }
  std::sort(v.cheapest_ids.begin(), v.cheapest_ids.end());
  std::sort(v.fastest_ids.begin(), v.fastest_ids.end());

  v.time_score = time_score(t_cheapest, min_seconds);
  v.flop_score = flop_score(f_fastest, min_flops);

  const bool disjoint = std::find_first_of(v.cheapest_ids.begin(), v.cheapest_ids.end(),
                                           v.fastest_ids.begin(),
                                           v.fastest_ids.end()) == v.cheapest_ids.end();
  v.is_anomaly = disjoint && v.time_score > thresholds.time_score_threshold;
  v.per_algorithm = std::move(per_algorithm);
  return v;
}

}  // namespace flopscope
