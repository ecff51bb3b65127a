// measure.hpp
//
// Measurement protocol: repeated, cache-flushed timings reduced to medians.

#pragma once

#include "flopscope/backend.hpp"
#include "flopscope/expr.hpp"

namespace flopscope {

// Times one algorithm on one instance. Per repetition the cache is flushed
// once, then all steps run back-to-back; medians are taken per step and for
// the per-repetition totals.
AlgorithmTiming measure_algorithm(Backend& backend, const Algorithm& alg, const Instance& inst,
                                  const MeasurementProtocol& protocol);

// Times a single kernel call in isolation: the cache is flushed before
// every repetition of the call.
TimingSample measure_call_isolated(Backend& backend, const Step& step,
                                   const MeasurementProtocol& protocol);

}  // namespace flopscope
