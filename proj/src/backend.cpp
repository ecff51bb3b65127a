#include "flopscope/backend.hpp"

#include <algorithm>
#include <stdexcept>

namespace flopscope {

void MachineConfig::validate() const {
  if (!(peak_flops > 0)) throw std::invalid_argument("machine.peak_flops must be > 0");
  if (llc_bytes <= 0) throw std::invalid_argument("machine.llc_bytes must be > 0");
  if (thread_count < 1) throw std::invalid_argument("machine.thread_count must be >= 1");
}

void MeasurementProtocol::validate() const {
  if (repetitions < 1) throw std::invalid_argument("protocol.repetitions must be >= 1");
  if (!(flush_multiplier > 0)) throw std::invalid_argument("protocol.flush_multiplier must be > 0");
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median of empty sample");
  std::sort(xs.begin(), xs.end());
  const size_t n = xs.size();
  if (n % 2 == 1) return xs[n / 2];
  return 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double efficiency(FlopCount flops, double seconds, double peak_flops) {
  if (!(seconds > 0)) throw std::invalid_argument("efficiency: seconds must be > 0");
  if (!(peak_flops > 0)) throw std::invalid_argument("efficiency: peak_flops must be > 0");
  return static_cast<double>(flops) / (seconds * peak_flops);
}

}  // namespace flopscope
