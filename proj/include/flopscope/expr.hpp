// expr.hpp
//
// Expression model: dimension tuples, kernel-call steps, and the fixed
// catalogues of mathematically equivalent algorithms for the supported
// expressions (matrix chains and A*A^T*B). FLOP counts are exact integers.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace flopscope {

// Matrix dimension size (element count along one axis), always >= 1.
using Dim = std::int64_t;

// Exact FLOP counts. 128-bit so that dims up to 1e6 cannot overflow even
// when summed over long chains.
using FlopCount = __int128;

std::string flops_to_string(FlopCount v);
std::int64_t flops_to_int64(FlopCount v);  // throws std::overflow_error out of range

enum class StepKind { Gemm, Syrk, Symm, CopyTriangleToFull };

const char* step_kind_name(StepKind kind);
StepKind step_kind_from_name(const std::string& name);

// An expression family: a chain product of n >= 2 dense matrices, or the
// symmetric product A*A^T*B.
struct ExpressionKind {
  enum class Tag { MatrixChain, AAtB };

  Tag tag = Tag::MatrixChain;
  int chain_length = 4;  // number of chain operands; meaningful for MatrixChain only

  static ExpressionKind matrix_chain(int n);
  static ExpressionKind aatb();

  int operand_count() const;
  int dim_count() const;  // dims per instance: n+1 for a chain, 3 for AAtB

  std::string name() const;                           // "chain4", "aatb", ...
  static ExpressionKind parse(const std::string& s);  // inverse of name()

  friend bool operator==(const ExpressionKind&, const ExpressionKind&) = default;
};

// A concrete problem: an expression kind with all dimension sizes fixed.
struct Instance {
  ExpressionKind kind;
  std::vector<Dim> dims;

  Instance(ExpressionKind k, std::vector<Dim> d);  // validates count and positivity
};

// Input of a step: an original expression operand or an intermediate
// produced by an earlier step of the same algorithm.
struct OperandRef {
  enum class Source { Operand, Intermediate };

  Source source = Source::Operand;
  int index = 0;  // operand position (0-based) or intermediate id (1-based)

  static OperandRef operand(int i) { return {Source::Operand, i}; }
  static OperandRef intermediate(int id) { return {Source::Intermediate, id}; }

  friend bool operator==(const OperandRef&, const OperandRef&) = default;
};

// Structural form of a step: sizes are slots (indices into the instance dim
// tuple) so one algorithm description serves every instance of its kind.
struct StepSpec {
  StepKind kind = StepKind::Gemm;
  bool transpose_a = false;
  bool transpose_b = false;
  int m_dim = -1, n_dim = -1, k_dim = -1;  // -1 where not applicable
  std::vector<OperandRef> inputs;
  int output = 0;  // intermediate id, 1-based per algorithm
};

// A step bound to an instance: concrete sizes, ready for a backend.
// Gemm uses m, n, k; Syrk m, k (m x m output); Symm m, n;
// CopyTriangleToFull only m. Unused sizes are 0.
struct Step {
  StepKind kind = StepKind::Gemm;
  bool transpose_a = false;
  bool transpose_b = false;
  Dim m = 0, n = 0, k = 0;
  std::vector<OperandRef> inputs;
  int output = 0;

  friend bool operator==(const Step&, const Step&) = default;
};

struct Algorithm {
  ExpressionKind kind;
  int id = 0;  // 1-based position in the fixed enumeration order
  std::vector<StepSpec> steps;
};

// All mathematically equivalent kernel-call algorithms for the expression,
// in a fixed order: chains enumerate every multiplication order
// ((n-1)! of them) lexicographically; AAtB has its fixed list of five.
std::vector<Algorithm> enumerate_algorithms(const ExpressionKind& kind);

// Binds an algorithm's dim slots to an instance. Throws on kind mismatch.
std::vector<Step> bind_steps(const Algorithm& alg, const Instance& inst);

// Gemm -> 2mnk, Syrk -> (m+1)mk, Symm -> 2m^2n, CopyTriangleToFull -> 0.
FlopCount flop_count_step(const Step& step);

// Sum of flop_count_step over the algorithm's steps bound to the instance.
FlopCount flop_count_algorithm(const Algorithm& alg, const Instance& inst);

// Dynamic-programming minimum over all chain parenthesizations with
// per-multiplication cost 2mnk. Independent of enumerate_algorithms.
FlopCount min_flops_chain_dp(const std::vector<Dim>& dims);

// Ids of all algorithms attaining the exact minimum FLOP count (sorted).
std::vector<int> cheapest_set(const std::vector<Algorithm>& algorithms, const Instance& inst);

}  // namespace flopscope
