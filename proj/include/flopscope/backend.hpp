// backend.hpp
//
// Execution backends and the timing protocol types. A backend runs bound
// steps and reports wall seconds per step; the measurement layer on top
// (measure.hpp) owns repetitions, cache flushing, and medians.

#pragma once

#include <chrono>
#include <memory>
#include <stdexcept>
#include <vector>

#include "flopscope/expr.hpp"

namespace flopscope {

struct MachineConfig {
  double peak_flops = 1e9;             // theoretical peak, FLOP/s
  std::int64_t llc_bytes = 32 << 20;   // last-level cache size
  int thread_count = 1;

  void validate() const;
};

struct MeasurementProtocol {
  int repetitions = 10;
  bool flush_before_each_repetition = true;
  double flush_multiplier = 4.0;  // flush buffer = multiplier * llc_bytes

  void validate() const;
};

struct TimingSample {
  double median_seconds = 0.0;
  std::vector<double> raw_seconds;  // one entry per repetition
  FlopCount flops = 0;
  double efficiency = 0.0;  // flops / (median_seconds * peak_flops)
  bool timer_warning = false;          // duration at or below timer resolution
  bool efficiency_suspicious = false;  // efficiency > 1, kept unclamped
};

// Full timing of one algorithm on one instance: the whole-algorithm sample
// plus one sample per step (steps timed individually, run back-to-back).
struct AlgorithmTiming {
  int algorithm_id = 0;
  TimingSample total;
  std::vector<TimingSample> per_step;
};

// Thrown by backends on kernel failure; carries the failing step index.
struct BackendError : std::runtime_error {
  BackendError(int step, const std::string& what)
      : std::runtime_error("step " + std::to_string(step) + ": " + what), step_index(step) {}
  int step_index;
};

// Per-instance state a backend keeps across repetitions (operand buffers).
class Workspace {
 public:
  virtual ~Workspace() = default;
};

class Backend {
 public:
  virtual ~Backend() = default;

  virtual const MachineConfig& machine() const = 0;

  // Allocates and fills operand buffers for the instance (reused across
  // repetitions; fill values do not affect timing).
  virtual std::unique_ptr<Workspace> prepare(const Instance& inst) = 0;

  // One repetition: executes the steps back-to-back, preserving inter-kernel
  // cache effects, and returns wall seconds per step. Intermediate buffers
  // are managed outside the timed sections.
  virtual std::vector<double> run_steps(const std::vector<Step>& steps, Workspace& ws) = 0;

  // One kernel call with self-contained operands (isolated benchmarking).
  virtual double run_call(const Step& step) = 0;

  // Evicts prior working sets by touching multiplier * llc_bytes of memory.
  // Model backends treat this as a no-op.
  virtual void flush_cache(const MeasurementProtocol& protocol) = 0;
};

// Median with the usual convention: mean of the two central order statistics
// for even counts. Throws on empty input.
double median(std::vector<double> xs);

// flops / (seconds * peak_flops). Throws std::invalid_argument unless
// seconds > 0 and peak_flops > 0. Values above 1 are returned as-is.
double efficiency(FlopCount flops, double seconds, double peak_flops);

inline double timer_resolution_seconds() {
  using period = std::chrono::steady_clock::period;
  return static_cast<double>(period::num) / static_cast<double>(period::den);
}

}  // namespace flopscope
