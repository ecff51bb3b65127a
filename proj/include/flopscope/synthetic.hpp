// synthetic.hpp
//
// Deterministic model backend. Kernel time is flops / (peak * e) where e
// follows a saturating ramp in the smallest operand dimension; the triangle
// copy is charged by memory traffic. Lets experiments run reproducibly and
// lets tests craft profiles with abrupt efficiency transitions.

#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "flopscope/backend.hpp"

namespace flopscope {

// Efficiency as a function of the kernel's smallest dimension:
//   e(d) = e_max_eff * (1 - exp(-d / tau))
// where e_max_eff is the base e_max, replaced by the override with the
// largest threshold <= d. Overrides give the curve step discontinuities.
struct KernelCurve {
  double e_max = 0.9;
  double tau = 200.0;
  std::vector<std::pair<Dim, double>> overrides;  // (threshold, e_max), ascending

  double at(Dim min_dim) const;
  void validate(const char* label) const;
};

struct EfficiencyProfile {
  KernelCurve gemm;
  KernelCurve syrk;
  KernelCurve symm;
  double copy_bandwidth = 8e9;  // bytes/s for CopyTriangleToFull
  double noise_stddev = 0.0;    // relative; 0 = exact model
  std::uint64_t rng_seed = 0;

  const KernelCurve& curve(StepKind kind) const;
  void validate() const;

  // One curve for every kernel; handy for null-hypothesis experiments.
  static EfficiencyProfile uniform(const KernelCurve& c, double copy_bandwidth);
};

class SyntheticBackend final : public Backend {
 public:
  SyntheticBackend(MachineConfig machine, EfficiencyProfile profile);

  const MachineConfig& machine() const override { return machine_; }
  std::unique_ptr<Workspace> prepare(const Instance& inst) override;
  std::vector<double> run_steps(const std::vector<Step>& steps, Workspace& ws) override;
  double run_call(const Step& step) override;
  void flush_cache(const MeasurementProtocol& protocol) override;

  // Noiseless model time of one step; run_* add noise when configured.
  double model_step_seconds(const Step& step) const;

  const EfficiencyProfile& profile() const { return profile_; }

 private:
  double noisy(double seconds);

  MachineConfig machine_;
  EfficiencyProfile profile_;
  std::mt19937_64 rng_;
};

}  // namespace flopscope
