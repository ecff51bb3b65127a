#include "flopscope/expr.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace flopscope {

std::string flops_to_string(FlopCount v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  std::string s;
  while (u != 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
    u /= 10;
  }
  if (neg) s.push_back('-');
  std::reverse(s.begin(), s.end());
  return s;
}

std::int64_t flops_to_int64(FlopCount v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw std::overflow_error("FLOP count does not fit in 64 bits: " + flops_to_string(v));
  return static_cast<std::int64_t>(v);
}

const char* step_kind_name(StepKind kind) {
  switch (kind) {
    case StepKind::Gemm: return "gemm";
    case StepKind::Syrk: return "syrk";
    case StepKind::Symm: return "symm";
    case StepKind::CopyTriangleToFull: return "copy_triangle_to_full";
  }
  return "?";
}

StepKind step_kind_from_name(const std::string& name) {
  if (name == "gemm") return StepKind::Gemm;
  if (name == "syrk") return StepKind::Syrk;
  if (name == "symm") return StepKind::Symm;
  if (name == "copy_triangle_to_full") return StepKind::CopyTriangleToFull;
  throw std::invalid_argument("unknown step kind: " + name);
}

ExpressionKind ExpressionKind::matrix_chain(int n) {
  if (n < 2) throw std::invalid_argument("matrix chain needs at least 2 operands");
  ExpressionKind k;
  k.tag = Tag::MatrixChain;
  k.chain_length = n;
  return k;
}

ExpressionKind ExpressionKind::aatb() {
  ExpressionKind k;
  k.tag = Tag::AAtB;
  k.chain_length = 0;
  return k;
}

int ExpressionKind::operand_count() const {
  return tag == Tag::MatrixChain ? chain_length : 2;
}

int ExpressionKind::dim_count() const {
  return tag == Tag::MatrixChain ? chain_length + 1 : 3;
}

std::string ExpressionKind::name() const {
  if (tag == Tag::AAtB) return "aatb";
  return "chain" + std::to_string(chain_length);
}

ExpressionKind ExpressionKind::parse(const std::string& s) {
  if (s == "aatb") return aatb();
  if (s.rfind("chain", 0) == 0) {
    const std::string num = s.substr(5);
    if (!num.empty() && std::all_of(num.begin(), num.end(), [](char c) { return c >= '0' && c <= '9'; }))
      return matrix_chain(std::stoi(num));
  }
  throw std::invalid_argument("unknown expression: " + s);
}

Instance::Instance(ExpressionKind k, std::vector<Dim> d) : kind(k), dims(std::move(d)) {
  if (static_cast<int>(dims.size()) != kind.dim_count())
    throw std::invalid_argument(kind.name() + " requires " + std::to_string(kind.dim_count()) +
                                " dims, got " + std::to_string(dims.size()));
  for (Dim v : dims)
    if (v < 1) throw std::invalid_argument("dims must be >= 1");
}

namespace {

// Chain algorithms are identified with permutations of the multiplication
// positions 0..n-2, where position g multiplies the block ending at operand
// g with the block starting at operand g+1. Lexicographic order over these
// permutations fixes the ids; for n = 4 this reproduces the canonical
// numbering 1..6.
Algorithm chain_algorithm_from_order(const ExpressionKind& kind, int id, const std::vector<int>& order) {
  const int n = kind.chain_length;
  Algorithm alg{kind, id, {}};
  // Block bookkeeping: for operand i, the block [lo..hi] currently containing
  // it, and the intermediate id holding that block (0 = still a leaf).
  std::vector<int> block_lo(n), block_hi(n), block_temp(n, 0);
  std::iota(block_lo.begin(), block_lo.end(), 0);
  std::iota(block_hi.begin(), block_hi.end(), 0);

  int next_temp = 1;
  for (int g : order) {
    const int left_lo = block_lo[g];
    const int right_hi = block_hi[g + 1];

    StepSpec step;
    step.kind = StepKind::Gemm;
    step.m_dim = left_lo;
    step.k_dim = g + 1;
    step.n_dim = right_hi + 1;
    step.inputs = {
        block_temp[g] == 0 ? OperandRef::operand(left_lo) : OperandRef::intermediate(block_temp[g]),
        block_temp[g + 1] == 0 ? OperandRef::operand(g + 1) : OperandRef::intermediate(block_temp[g + 1]),
    };
    step.output = next_temp;
    alg.steps.push_back(std::move(step));

    for (int i = left_lo; i <= right_hi; ++i) {
      block_lo[i] = left_lo;
      block_hi[i] = right_hi;
      block_temp[i] = next_temp;
    }
    ++next_temp;
  }
  return alg;
}

std::vector<Algorithm> enumerate_chain(const ExpressionKind& kind) {
  const int n = kind.chain_length;
  std::vector<int> order(n - 1);
  std::iota(order.begin(), order.end(), 0);

  std::vector<Algorithm> algorithms;
  int id = 1;
  do {
    algorithms.push_back(chain_algorithm_from_order(kind, id++, order));
  } while (std::next_permutation(order.begin(), order.end()));
  return algorithms;
}

// The five AAtB algorithms, in the fixed catalogue order:
//   1: SYRK (M = A A^T), SYMM (M B)
//   2: SYRK, triangle copy, GEMM (M B)
//   3: GEMM (M = A A^T), SYMM
//   4: GEMM, GEMM
//   5: GEMM (M = A^T B), GEMM (A M)
// Dim slots: d0, d1, d2 with A of size d0 x d1 and B of size d0 x d2.
std::vector<Algorithm> enumerate_aatb(const ExpressionKind& kind) {
  const OperandRef A = OperandRef::operand(0);
  const OperandRef B = OperandRef::operand(1);
  auto M = [](int id) { return OperandRef::intermediate(id); };

  StepSpec syrk{StepKind::Syrk, false, false, 0, -1, 1, {A}, 1};
  StepSpec symm_after_1{StepKind::Symm, false, false, 0, 2, -1, {M(1), B}, 2};
  StepSpec copy{StepKind::CopyTriangleToFull, false, false, 0, -1, -1, {M(1)}, 2};
  StepSpec gemm_after_copy{StepKind::Gemm, false, false, 0, 2, 0, {M(2), B}, 3};
  StepSpec gemm_aat{StepKind::Gemm, false, true, 0, 0, 1, {A, A}, 1};
  StepSpec gemm_mb{StepKind::Gemm, false, false, 0, 2, 0, {M(1), B}, 2};
  StepSpec gemm_atb{StepKind::Gemm, true, false, 1, 2, 0, {A, B}, 1};
  StepSpec gemm_am{StepKind::Gemm, false, false, 0, 2, 1, {A, M(1)}, 2};

  return {
      {kind, 1, {syrk, symm_after_1}},
      {kind, 2, {syrk, copy, gemm_after_copy}},
      {kind, 3, {gemm_aat, symm_after_1}},
      {kind, 4, {gemm_aat, gemm_mb}},
      {kind, 5, {gemm_atb, gemm_am}},
  };
}

}  // namespace

std::vector<Algorithm> enumerate_algorithms(const ExpressionKind& kind) {
  switch (kind.tag) {
    case ExpressionKind::Tag::MatrixChain: return enumerate_chain(kind);
    case ExpressionKind::Tag::AAtB: return enumerate_aatb(kind);
  }
  throw std::invalid_argument("unknown expression");
}

std::vector<Step> bind_steps(const Algorithm& alg, const Instance& inst) {
  if (!(alg.kind == inst.kind))
    throw std::invalid_argument("algorithm for " + alg.kind.name() + " bound to instance of " + inst.kind.name());

  std::vector<Step> steps;
  steps.reserve(alg.steps.size());
  auto dim_at = [&](int slot) -> Dim { return slot < 0 ? 0 : inst.dims.at(static_cast<size_t>(slot)); };
  for (const StepSpec& spec : alg.steps) {
    Step s;
    s.kind = spec.kind;
    s.transpose_a = spec.transpose_a;
    s.transpose_b = spec.transpose_b;
    s.m = dim_at(spec.m_dim);
    s.n = dim_at(spec.n_dim);
    s.k = dim_at(spec.k_dim);
    s.inputs = spec.inputs;
    s.output = spec.output;
    steps.push_back(std::move(s));
  }
  return steps;
}

FlopCount flop_count_step(const Step& step) {
  const FlopCount m = step.m, n = step.n, k = step.k;
  switch (step.kind) {
    case StepKind::Gemm: return 2 * m * n * k;
    case StepKind::Syrk: return (m + 1) * m * k;
    case StepKind::Symm: return 2 * m * m * n;
    case StepKind::CopyTriangleToFull: return 0;  // data movement only
  }
  throw std::invalid_argument("unknown step kind");
}

FlopCount flop_count_algorithm(const Algorithm& alg, const Instance& inst) {
  FlopCount total = 0;
  for (const Step& s : bind_steps(alg, inst)) total += flop_count_step(s);
  return total;
}

FlopCount min_flops_chain_dp(const std::vector<Dim>& dims) {
  if (dims.size() < 2) throw std::invalid_argument("chain needs at least 2 dims");
  const int n = static_cast<int>(dims.size()) - 1;  // number of matrices
  constexpr FlopCount kInf = ~(static_cast<unsigned __int128>(1) << 127) >> 1;

  std::vector<std::vector<FlopCount>> cost(n, std::vector<FlopCount>(n, 0));
  for (int len = 2; len <= n; ++len) {
    for (int i = 0; i + len - 1 < n; ++i) {
      const int j = i + len - 1;
      cost[i][j] = kInf;
      for (int split = i; split < j; ++split) {
        const FlopCount c = cost[i][split] + cost[split + 1][j] +
                            2 * static_cast<FlopCount>(dims[i]) * dims[split + 1] * dims[j + 1];
        cost[i][j] = std::min(cost[i][j], c);
      }
    }
  }
  return cost[0][n - 1];
}

std::vector<int> cheapest_set(const std::vector<Algorithm>& algorithms, const Instance& inst) {
  if (algorithms.empty()) throw std::invalid_argument("cheapest_set: no algorithms");
  std::vector<FlopCount> counts;
  counts.reserve(algorithms.size());
  for (const Algorithm& alg : algorithms) counts.push_back(flop_count_algorithm(alg, inst));
  const FlopCount min = *std::min_element(counts.begin(), counts.end());
  std::vector<int> ids;
  for (size_t i = 0; i < algorithms.size(); ++i)
    if (counts[i] == min) ids.push_back(algorithms[i].id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace flopscope
