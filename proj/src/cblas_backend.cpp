#include "flopscope/cblas_backend.hpp"

#include <cblas.h>

#include <chrono>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace flopscope {

namespace {

// Column-major dense buffer.
struct Matrix {
  Dim rows = 0, cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(Dim r, Dim c) : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c)) {}
  double* ptr() { return data.data(); }
  const double* ptr() const { return data.data(); }
};

void fill_uniform(Matrix& m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (double& v : m.data) v = dist(rng);
}

class CblasWorkspace final : public Workspace {
 public:
  std::vector<Matrix> operands;
};

std::vector<Matrix> operand_matrices(const Instance& inst, std::mt19937_64& rng) {
  std::vector<Matrix> ops;
  if (inst.kind.tag == ExpressionKind::Tag::MatrixChain) {
    for (int i = 0; i < inst.kind.operand_count(); ++i)
      ops.emplace_back(inst.dims[static_cast<size_t>(i)], inst.dims[static_cast<size_t>(i) + 1]);
  } else {
    ops.emplace_back(inst.dims[0], inst.dims[1]);  // A
    ops.emplace_back(inst.dims[0], inst.dims[2]);  // B
  }
  for (Matrix& m : ops) fill_uniform(m, rng);
  return ops;
}

double now_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

void expect_shape(const Matrix& m, Dim rows, Dim cols, const char* what) {
  if (m.rows != rows || m.cols != cols)
    throw std::logic_error(std::string(what) + ": operand shape mismatch");
}

// Mirrors the lower triangle into the upper one, in place.
double timed_copy_triangle(Matrix& m) {
  const Dim n = m.rows;
  double* a = m.ptr();
  const double t0 = now_seconds();
  for (Dim j = 0; j < n; ++j)
    for (Dim i = j + 1; i < n; ++i) a[static_cast<size_t>(j) + static_cast<size_t>(i) * n] =
        a[static_cast<size_t>(i) + static_cast<size_t>(j) * n];
  return now_seconds() - t0;
}

double timed_kernel(const Step& s, const Matrix& a, const Matrix* b, Matrix& out) {
  switch (s.kind) {
    case StepKind::Gemm: {
      expect_shape(a, s.transpose_a ? s.k : s.m, s.transpose_a ? s.m : s.k, "gemm A");
      expect_shape(*b, s.transpose_b ? s.n : s.k, s.transpose_b ? s.k : s.n, "gemm B");
      const double t0 = now_seconds();
      cblas_dgemm(CblasColMajor, s.transpose_a ? CblasTrans : CblasNoTrans,
                  s.transpose_b ? CblasTrans : CblasNoTrans, static_cast<int>(s.m),
                  static_cast<int>(s.n), static_cast<int>(s.k), 1.0, a.ptr(),
                  static_cast<int>(a.rows), b->ptr(), static_cast<int>(b->rows), 0.0, out.ptr(),
                  static_cast<int>(s.m));
      return now_seconds() - t0;
    }
    case StepKind::Syrk: {
      expect_shape(a, s.m, s.k, "syrk A");
      const double t0 = now_seconds();
      cblas_dsyrk(CblasColMajor, CblasLower, CblasNoTrans, static_cast<int>(s.m),
                  static_cast<int>(s.k), 1.0, a.ptr(), static_cast<int>(a.rows), 0.0, out.ptr(),
                  static_cast<int>(s.m));
      return now_seconds() - t0;
    }
    case StepKind::Symm: {
      expect_shape(a, s.m, s.m, "symm A");
      expect_shape(*b, s.m, s.n, "symm B");
      const double t0 = now_seconds();
      cblas_dsymm(CblasColMajor, CblasLeft, CblasLower, static_cast<int>(s.m),
                  static_cast<int>(s.n), 1.0, a.ptr(), static_cast<int>(a.rows), b->ptr(),
                  static_cast<int>(b->rows), 0.0, out.ptr(), static_cast<int>(s.m));
      return now_seconds() - t0;
    }
    case StepKind::CopyTriangleToFull: break;  // handled by the caller (in place)
  }
  throw std::logic_error("unexpected step kind");
}

volatile double g_flush_sink;  // keeps the flush traffic observable

}  // namespace

CblasBackend::CblasBackend(MachineConfig machine, std::uint64_t fill_seed)
    : machine_(machine), fill_seed_(fill_seed) {
  machine_.validate();
}

std::unique_ptr<Workspace> CblasBackend::prepare(const Instance& inst) {
  auto ws = std::make_unique<CblasWorkspace>();
  std::mt19937_64 rng(fill_seed_);
  ws->operands = operand_matrices(inst, rng);
  return ws;
}

namespace {

// Shared execution core. Intermediates live for the whole repetition so
// later steps can read them; a copy step reuses its input's storage
// (in-place mirror). Optionally hands out the final step's buffer.
std::vector<double> execute_steps(CblasWorkspace& cws, const std::vector<Step>& steps,
                                  std::shared_ptr<Matrix>* final_out) {
  std::unordered_map<int, std::shared_ptr<Matrix>> temps;

  auto resolve = [&](const OperandRef& ref) -> Matrix& {
    if (ref.source == OperandRef::Source::Operand) return cws.operands.at(static_cast<size_t>(ref.index));
    return *temps.at(ref.index);
  };

  std::vector<double> seconds;
  seconds.reserve(steps.size());
  std::shared_ptr<Matrix> last;
  for (size_t si = 0; si < steps.size(); ++si) {
    const Step& s = steps[si];
    try {
      if (s.kind == StepKind::CopyTriangleToFull) {
        auto src = temps.at(s.inputs.at(0).index);
        expect_shape(*src, s.m, s.m, "copy");
        seconds.push_back(timed_copy_triangle(*src));
        temps[s.output] = src;
        last = src;
        continue;
      }
      Matrix& a = resolve(s.inputs.at(0));
      Matrix* b = s.inputs.size() > 1 ? &resolve(s.inputs.at(1)) : nullptr;
      auto out = std::make_shared<Matrix>(s.m, s.kind == StepKind::Syrk ? s.m : s.n);
      seconds.push_back(timed_kernel(s, a, b, *out));
      temps[s.output] = out;
      last = std::move(out);
    } catch (const std::exception& e) {
      throw BackendError(static_cast<int>(si), e.what());
    }
  }
  if (final_out) *final_out = std::move(last);
  return seconds;
}

}  // namespace

std::vector<double> CblasBackend::run_steps(const std::vector<Step>& steps, Workspace& ws) {
  return execute_steps(dynamic_cast<CblasWorkspace&>(ws), steps, nullptr);
}

std::vector<double> CblasBackend::compute_result(const std::vector<Step>& steps,
                                                 const Instance& inst) {
  auto ws = prepare(inst);
  std::shared_ptr<Matrix> final_out;
  execute_steps(dynamic_cast<CblasWorkspace&>(*ws), steps, &final_out);
  if (!final_out) throw std::invalid_argument("compute_result: no steps");
  return final_out->data;
}

std::vector<std::vector<double>> CblasBackend::operand_buffers(const Instance& inst) const {
  std::mt19937_64 rng(fill_seed_);
  std::vector<std::vector<double>> buffers;
  for (Matrix& m : operand_matrices(inst, rng)) buffers.push_back(std::move(m.data));
  return buffers;
}

double CblasBackend::run_call(const Step& step) {
  std::mt19937_64 rng(fill_seed_ ^ 0x9e3779b97f4a7c15ULL);
  try {
    switch (step.kind) {
      case StepKind::CopyTriangleToFull: {
        Matrix m(step.m, step.m);
        fill_uniform(m, rng);
        return timed_copy_triangle(m);
      }
      case StepKind::Gemm: {
        Matrix a(step.transpose_a ? step.k : step.m, step.transpose_a ? step.m : step.k);
        Matrix b(step.transpose_b ? step.n : step.k, step.transpose_b ? step.k : step.n);
        fill_uniform(a, rng);
        fill_uniform(b, rng);
        Matrix out(step.m, step.n);
        return timed_kernel(step, a, &b, out);
      }
      case StepKind::Syrk: {
        Matrix a(step.m, step.k);
        fill_uniform(a, rng);
        Matrix out(step.m, step.m);
        return timed_kernel(step, a, nullptr, out);
      }
      case StepKind::Symm: {
        Matrix a(step.m, step.m);
        Matrix b(step.m, step.n);
        fill_uniform(a, rng);
        fill_uniform(b, rng);
        Matrix out(step.m, step.n);
        return timed_kernel(step, a, &b, out);
      }
    }
    throw std::logic_error("unexpected step kind");
  } catch (const std::exception& e) {
    throw BackendError(0, e.what());
  }
}

void CblasBackend::flush_cache(const MeasurementProtocol& protocol) {
  const auto bytes = static_cast<size_t>(protocol.flush_multiplier * static_cast<double>(machine_.llc_bytes));
  const size_t count = bytes / sizeof(double);
  if (flush_buffer_.size() != count) flush_buffer_.assign(count, 0.0);
  double acc = 0.0;
  for (size_t i = 0; i < flush_buffer_.size(); ++i) flush_buffer_[i] = static_cast<double>(i & 0xFFFF);
  for (size_t i = 0; i < flush_buffer_.size(); ++i) acc += flush_buffer_[i];
  g_flush_sink = acc;
}

}  // namespace flopscope
