#include "flopscope/measure.hpp"

#include <numeric>

namespace flopscope {

namespace {

TimingSample finish_sample(std::vector<double> raw, FlopCount flops, double peak_flops) {
  TimingSample s;
  s.raw_seconds = std::move(raw);
  s.median_seconds = median(s.raw_seconds);
  s.flops = flops;
  if (s.median_seconds > 0)
    s.efficiency = efficiency(flops, s.median_seconds, peak_flops);
  else
    s.efficiency = flops == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  s.timer_warning = s.median_seconds <= timer_resolution_seconds();
  s.efficiency_suspicious = s.efficiency > 1.0;
  return s;
}

}  // namespace

AlgorithmTiming measure_algorithm(Backend& backend, const Algorithm& alg, const Instance& inst,
                                  const MeasurementProtocol& protocol) {
  protocol.validate();
  const std::vector<Step> steps = bind_steps(alg, inst);
  const auto workspace = backend.prepare(inst);

  std::vector<std::vector<double>> step_times(steps.size(),
                                              std::vector<double>(static_cast<size_t>(protocol.repetitions)));
  std::vector<double> totals(static_cast<size_t>(protocol.repetitions));

  for (int rep = 0; rep < protocol.repetitions; ++rep) {
    if (protocol.flush_before_each_repetition) backend.flush_cache(protocol);
    const std::vector<double> seconds = backend.run_steps(steps, *workspace);
    totals[static_cast<size_t>(rep)] = std::accumulate(seconds.begin(), seconds.end(), 0.0);
    for (size_t i = 0; i < steps.size(); ++i) step_times[i][static_cast<size_t>(rep)] = seconds[i];
  }

  const double peak = backend.machine().peak_flops;
  AlgorithmTiming timing;
  timing.algorithm_id = alg.id;

  FlopCount total_flops = 0;
  for (size_t i = 0; i < steps.size(); ++i) {
    const FlopCount f = flop_count_step(steps[i]);
    total_flops += f;
    timing.per_step.push_back(finish_sample(std::move(step_times[i]), f, peak));
  }
  timing.total = finish_sample(std::move(totals), total_flops, peak);
  return timing;
}

TimingSample measure_call_isolated(Backend& backend, const Step& step,
                                   const MeasurementProtocol& protocol) {
  protocol.validate();
  std::vector<double> raw(static_cast<size_t>(protocol.repetitions));
  for (int rep = 0; rep < protocol.repetitions; ++rep) {
    if (protocol.flush_before_each_repetition) backend.flush_cache(protocol);
    raw[static_cast<size_t>(rep)] = backend.run_call(step);
  }
  return finish_sample(std::move(raw), flop_count_step(step), backend.machine().peak_flops);
}

}  // namespace flopscope
