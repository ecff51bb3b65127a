// cblas_backend.hpp
//
// Real backend: dispatches steps to the host BLAS through the CBLAS
// interface (column-major, double precision) and times each call with a
// monotonic wall clock. Built only when a CBLAS library is available.

#pragma once

#include <cstdint>
#include <vector>

#include "flopscope/backend.hpp"

namespace flopscope {

class CblasBackend final : public Backend {
 public:
  explicit CblasBackend(MachineConfig machine, std::uint64_t fill_seed = 0x5eed);

  const MachineConfig& machine() const override { return machine_; }
  std::unique_ptr<Workspace> prepare(const Instance& inst) override;
  std::vector<double> run_steps(const std::vector<Step>& steps, Workspace& ws) override;
  double run_call(const Step& step) override;
  void flush_cache(const MeasurementProtocol& protocol) override;

  std::size_t flush_buffer_bytes() const { return flush_buffer_.size() * sizeof(double); }

  // Executes the steps once on freshly prepared operands and returns the
  // final output buffer (column-major). Lets tests check that every
  // algorithm of an expression computes the same matrix.
  std::vector<double> compute_result(const std::vector<Step>& steps, const Instance& inst);

  // The operand buffers prepare() creates for this instance (column-major,
  // in operand order), for building independent numerical references.
  std::vector<std::vector<double>> operand_buffers(const Instance& inst) const;

 private:
  MachineConfig machine_;
  std::uint64_t fill_seed_;
  std::vector<double> flush_buffer_;
};

}  // namespace flopscope
