#include "flopscope/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace flopscope {

double KernelCurve::at(Dim min_dim) const {
  double e = e_max;
  for (const auto& [threshold, value] : overrides)
    if (min_dim >= threshold) e = value;
  return e * (1.0 - std::exp(-static_cast<double>(min_dim) / tau));
}

void KernelCurve::validate(const char* label) const {
  auto check_e = [&](double e) {
    if (!(e > 0.0) || e > 1.0)
      throw std::invalid_argument(std::string(label) + ".e_max must be in (0, 1]");
  };
  check_e(e_max);
  if (!(tau > 0)) throw std::invalid_argument(std::string(label) + ".tau must be > 0");
  Dim prev = std::numeric_limits<Dim>::min();
  for (const auto& [threshold, value] : overrides) {
    check_e(value);
    if (threshold <= prev)
      throw std::invalid_argument(std::string(label) + ".overrides must be ascending in threshold");
    prev = threshold;
  }
}

const KernelCurve& EfficiencyProfile::curve(StepKind kind) const {
  switch (kind) {
    case StepKind::Gemm: return gemm;
    case StepKind::Syrk: return syrk;
    case StepKind::Symm: return symm;
    case StepKind::CopyTriangleToFull: break;
  }
  throw std::invalid_argument("no efficiency curve for copy steps");
}

void EfficiencyProfile::validate() const {
  gemm.validate("profile.gemm");
  syrk.validate("profile.syrk");
  symm.validate("profile.symm");
  if (!(copy_bandwidth > 0)) throw std::invalid_argument("profile.copy_bandwidth must be > 0");
  if (noise_stddev < 0) throw std::invalid_argument("profile.noise_stddev must be >= 0");
}

EfficiencyProfile EfficiencyProfile::uniform(const KernelCurve& c, double copy_bandwidth) {
  EfficiencyProfile p;
  p.gemm = p.syrk = p.symm = c;
  p.copy_bandwidth = copy_bandwidth;
  return p;
}

namespace {

class EmptyWorkspace final : public Workspace {};

Dim step_min_dim(const Step& s) {
  switch (s.kind) {
    case StepKind::Gemm: return std::min({s.m, s.n, s.k});
    case StepKind::Syrk: return std::min(s.m, s.k);
    case StepKind::Symm: return std::min(s.m, s.n);
    case StepKind::CopyTriangleToFull: return s.m;
  }
  throw std::invalid_argument("unknown step kind");
}

}  // namespace

SyntheticBackend::SyntheticBackend(MachineConfig machine, EfficiencyProfile profile)
    : machine_(machine), profile_(std::move(profile)), rng_(profile_.rng_seed) {
  machine_.validate();
  profile_.validate();
}

double SyntheticBackend::model_step_seconds(const Step& step) const {
  if (step.kind == StepKind::CopyTriangleToFull)
    return static_cast<double>(step.m) * static_cast<double>(step.m) * 8.0 / profile_.copy_bandwidth;
  const double e = profile_.curve(step.kind).at(step_min_dim(step));
  return static_cast<double>(flop_count_step(step)) / (machine_.peak_flops * e);
}

double SyntheticBackend::noisy(double seconds) {
  if (profile_.noise_stddev == 0.0) return seconds;
  std::normal_distribution<double> noise(1.0, profile_.noise_stddev);
  return seconds * std::max(noise(rng_), 1e-3);
}

std::unique_ptr<Workspace> SyntheticBackend::prepare(const Instance&) {
  return std::make_unique<EmptyWorkspace>();
}

std::vector<double> SyntheticBackend::run_steps(const std::vector<Step>& steps, Workspace&) {
  std::vector<double> seconds;
  seconds.reserve(steps.size());
  for (const Step& s : steps) seconds.push_back(noisy(model_step_seconds(s)));
  return seconds;
}

double SyntheticBackend::run_call(const Step& step) { return noisy(model_step_seconds(step)); }

void SyntheticBackend::flush_cache(const MeasurementProtocol&) {}  // model has no cache state

}  // namespace flopscope
