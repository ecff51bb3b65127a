// anomaly.hpp
//
// Anomaly classification: an instance is anomalous when none of the
// minimum-FLOP algorithms is among the fastest and the time score clears
// the threshold. Pure functions over (id, flops, seconds) triples.

#pragma once

#include <vector>

#include "flopscope/expr.hpp"

namespace flopscope {

struct Thresholds {
  double time_score_threshold = 0.10;

  void validate() const;  // requires 0 <= threshold < 1
};

struct AlgorithmResult {
  int id = 0;
  FlopCount flops = 0;
  double seconds = 0.0;
  double efficiency = 0.0;
};

struct Verdict {
  Instance instance;
  std::vector<int> cheapest_ids;  // argmin over FLOP counts, sorted
  std::vector<int> fastest_ids;   // argmin over seconds, sorted
  double time_score = 0.0;
  double flop_score = 0.0;
  bool is_anomaly = false;
  std::vector<AlgorithmResult> per_algorithm;
};

// (T_cheapest - T_fastest) / T_cheapest, where T_fastest is the global
// minimum and T_cheapest the fastest time among the cheapest algorithms.
double time_score(double t_cheapest, double t_fastest);

// (F_fastest - F_cheapest) / F_fastest, where F_fastest is the FLOP count
// of the cheapest among the fastest algorithms.
double flop_score(FlopCount f_fastest, FlopCount f_cheapest);

// Ties are exact (integer FLOP counts, bitwise-equal seconds); robustness
// against near-ties lives in the threshold alone.
Verdict classify(Instance inst, std::vector<AlgorithmResult> per_algorithm,
                 const Thresholds& thresholds);

}  // namespace flopscope
