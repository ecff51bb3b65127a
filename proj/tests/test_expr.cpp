#include "flopscope/expr.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "doctest.h"

using namespace flopscope;

namespace {

Instance chain4(std::vector<Dim> dims) { return Instance(ExpressionKind::matrix_chain(4), std::move(dims)); }
Instance aatb(std::vector<Dim> dims) { return Instance(ExpressionKind::aatb(), std::move(dims)); }

// Closed-form FLOP counts for the six chain algorithms, straight from the
// per-algorithm formulas (kept independent of the step machinery).
FlopCount chain_closed_form(int id, const std::vector<Dim>& d) {
  const FlopCount d0 = d[0], d1 = d[1], d2 = d[2], d3 = d[3], d4 = d[4];
  switch (id) {
    case 1: return 2 * d0 * (d1 * d2 + d2 * d3 + d3 * d4);
    case 2: return 2 * d2 * (d0 * d1 + d0 * d4 + d3 * d4);
    case 3: return 2 * d3 * (d0 * d1 + d0 * d4 + d1 * d2);
    case 4: return 2 * d1 * (d0 * d4 + d2 * d3 + d3 * d4);
    case 5: return 2 * d2 * (d0 * d1 + d0 * d4 + d3 * d4);
    case 6: return 2 * d4 * (d0 * d1 + d1 * d2 + d2 * d3);
  }
  FAIL("bad id");
  return 0;
}

// Same for the five AAtB algorithms.
FlopCount aatb_closed_form(int id, const std::vector<Dim>& d) {
  const FlopCount d0 = d[0], d1 = d[1], d2 = d[2];
  switch (id) {
    case 1:
    case 2: return d0 * ((d0 + 1) * d1 + 2 * d0 * d2);
    case 3:
    case 4: return 2 * d0 * d0 * (d1 + d2);
    case 5: return 4 * d0 * d1 * d2;
  }
  FAIL("bad id");
  return 0;
}

// Independent count of adjacent-pair multiplication orderings.
long count_orderings(int blocks) {
  if (blocks <= 1) return 1;
  return (blocks - 1) * count_orderings(blocks - 1);
}

// Canonical parenthesization tree induced by an algorithm, as a string.
std::string tree_key(const Algorithm& alg) {
  std::map<int, std::string> names;  // intermediate id -> nested expression
  auto name_of = [&](const OperandRef& ref) {
    if (ref.source == OperandRef::Source::Operand) return "M" + std::to_string(ref.index);
    return names.at(ref.index);
  };
  std::string last;
  for (const StepSpec& s : alg.steps) {
    last = "(" + name_of(s.inputs[0]) + name_of(s.inputs[1]) + ")";
    names[s.output] = last;
  }
  return last;
}

std::vector<Dim> random_dims(std::mt19937_64& rng, int count, Dim lo, Dim hi) {
  std::uniform_int_distribution<Dim> dist(lo, hi);
  std::vector<Dim> dims(static_cast<size_t>(count));
  for (Dim& d : dims) d = dist(rng);
  return dims;
}

}  // namespace

TEST_CASE("expression kinds and instance validation") {
  CHECK(ExpressionKind::matrix_chain(4).dim_count() == 5);
  CHECK(ExpressionKind::aatb().dim_count() == 3);
  CHECK(ExpressionKind::parse("chain4") == ExpressionKind::matrix_chain(4));
  CHECK(ExpressionKind::parse("aatb") == ExpressionKind::aatb());
  CHECK(ExpressionKind::matrix_chain(7).name() == "chain7");
  CHECK_THROWS_AS(ExpressionKind::parse("chains"), std::invalid_argument);
  CHECK_THROWS_AS(ExpressionKind::matrix_chain(1), std::invalid_argument);

  CHECK_THROWS_AS(chain4({2, 3, 4, 5}), std::invalid_argument);     // missing dim
  CHECK_THROWS_AS(aatb({10, 20}), std::invalid_argument);           // missing dim
  CHECK_THROWS_AS(chain4({2, 3, 0, 5, 6}), std::invalid_argument);  // dim < 1
}

TEST_CASE("enumerate_algorithms counts and paper ids") {
  CHECK(enumerate_algorithms(ExpressionKind::matrix_chain(4)).size() == 6);
  CHECK(enumerate_algorithms(ExpressionKind::aatb()).size() == 5);
  CHECK(enumerate_algorithms(ExpressionKind::matrix_chain(2)).size() == 1);
  CHECK(enumerate_algorithms(ExpressionKind::matrix_chain(5)).size() == 24);
  CHECK(count_orderings(5) == 24);

  // (n-1)! for n = 2..7, cross-checked against the recursive ordering count.
  for (int n = 2; n <= 7; ++n) {
    const auto algs = enumerate_algorithms(ExpressionKind::matrix_chain(n));
    CHECK(algs.size() == static_cast<size_t>(count_orderings(n)));
    for (size_t i = 0; i < algs.size(); ++i) CHECK(algs[i].id == static_cast<int>(i) + 1);
  }
}

TEST_CASE("chain(4) algorithms match the fixed kernel-call sequences") {
  const auto algs = enumerate_algorithms(ExpressionKind::matrix_chain(4));
  const Instance inst = chain4({2, 3, 4, 5, 6});

  // Algorithm 1: M1 := AB; M2 := M1 C; M2 D.
  auto steps = bind_steps(algs[0], inst);
  REQUIRE(steps.size() == 3);
  CHECK(steps[0].m == 2);
  CHECK(steps[0].k == 3);
  CHECK(steps[0].n == 4);
  CHECK(steps[1].inputs[0] == OperandRef::intermediate(1));
  CHECK(steps[1].inputs[1] == OperandRef::operand(2));
  CHECK(steps[2].n == 6);

  // Algorithm 5: M1 := CD; M2 := AB; M2 M1.
  steps = bind_steps(algs[4], inst);
  REQUIRE(steps.size() == 3);
  CHECK(steps[0].inputs[0] == OperandRef::operand(2));
  CHECK(steps[0].inputs[1] == OperandRef::operand(3));
  CHECK(steps[1].inputs[0] == OperandRef::operand(0));
  CHECK(steps[2].inputs[0] == OperandRef::intermediate(2));
  CHECK(steps[2].inputs[1] == OperandRef::intermediate(1));

  // Every algorithm ends with the full d0 x d4 product and uses plain GEMMs.
  for (const Algorithm& alg : algs) {
    const auto bound = bind_steps(alg, inst);
    CHECK(bound.size() == 3);
    for (const Step& s : bound) {
      CHECK(s.kind == StepKind::Gemm);
      CHECK_FALSE(s.transpose_a);
      CHECK_FALSE(s.transpose_b);
    }
    CHECK(bound.back().m == 2);
    CHECK(bound.back().n == 6);
  }
}

TEST_CASE("aatb algorithms match the fixed catalogue") {
  const auto algs = enumerate_algorithms(ExpressionKind::aatb());
  const Instance inst = aatb({10, 20, 30});

  auto kinds = [&](int idx) {
    std::vector<StepKind> ks;
    for (const Step& s : bind_steps(algs[static_cast<size_t>(idx)], inst)) ks.push_back(s.kind);
    return ks;
  };
  CHECK(kinds(0) == std::vector<StepKind>{StepKind::Syrk, StepKind::Symm});
  CHECK(kinds(1) ==
        std::vector<StepKind>{StepKind::Syrk, StepKind::CopyTriangleToFull, StepKind::Gemm});
  CHECK(kinds(2) == std::vector<StepKind>{StepKind::Gemm, StepKind::Symm});
  CHECK(kinds(3) == std::vector<StepKind>{StepKind::Gemm, StepKind::Gemm});
  CHECK(kinds(4) == std::vector<StepKind>{StepKind::Gemm, StepKind::Gemm});

  // Algorithm 3/4 form A A^T via a transposed-B GEMM; algorithm 5 starts
  // with A^T B.
  const auto alg4 = bind_steps(algs[3], inst);
  CHECK(alg4[0].transpose_b);
  CHECK(alg4[0].m == 10);
  CHECK(alg4[0].n == 10);
  CHECK(alg4[0].k == 20);
  const auto alg5 = bind_steps(algs[4], inst);
  CHECK(alg5[0].transpose_a);
  CHECK(alg5[0].m == 20);
  CHECK(alg5[0].n == 30);
  CHECK(alg5[0].k == 10);
  CHECK(alg5[1].inputs[0] == OperandRef::operand(0));

  // The copy step is the only zero-FLOP step and sits between the kernels.
  const auto alg2 = bind_steps(algs[1], inst);
  CHECK(alg2[1].m == 10);
  CHECK(flop_count_step(alg2[1]) == 0);
}

TEST_CASE("flop_count_step formulas") {
  Step gemm{StepKind::Gemm, false, false, 2, 4, 3, {}, 1};
  CHECK(flop_count_step(gemm) == 48);
  Step syrk{StepKind::Syrk, false, false, 4, 0, 5, {}, 1};
  CHECK(flop_count_step(syrk) == 100);
  Step symm{StepKind::Symm, false, false, 3, 7, 0, {}, 1};
  CHECK(flop_count_step(symm) == 2 * 9 * 7);
  Step copy{StepKind::CopyTriangleToFull, false, false, 100, 0, 0, {}, 1};
  CHECK(flop_count_step(copy) == 0);
}

TEST_CASE("flop_count_algorithm worked examples") {
  const auto chain_algs = enumerate_algorithms(ExpressionKind::matrix_chain(4));
  CHECK(flop_count_algorithm(chain_algs[0], chain4({2, 3, 4, 5, 6})) == 248);  // 48 + 80 + 120

  const auto aatb_algs = enumerate_algorithms(ExpressionKind::aatb());
  CHECK(flop_count_algorithm(aatb_algs[4], aatb({10, 20, 30})) == 24000);  // 12000 + 12000
  // Algorithms 1 and 2 always tie: the copy adds no FLOPs.
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    const Instance inst = aatb(random_dims(rng, 3, 1, 500));
    CHECK(flop_count_algorithm(aatb_algs[0], inst) == flop_count_algorithm(aatb_algs[1], inst));
  }

  CHECK_THROWS_AS(flop_count_algorithm(chain_algs[0], aatb({2, 3, 4})), std::invalid_argument);
}

TEST_CASE("per-step sums equal the closed forms on 1000 seeded instances") {
  std::mt19937_64 rng(20240101);
  const auto chain_algs = enumerate_algorithms(ExpressionKind::matrix_chain(4));
  const auto aatb_algs = enumerate_algorithms(ExpressionKind::aatb());
  for (int i = 0; i < 1000; ++i) {
    const Instance c = chain4(random_dims(rng, 5, 20, 1200));
    for (const Algorithm& alg : chain_algs)
      CHECK(flop_count_algorithm(alg, c) == chain_closed_form(alg.id, c.dims));
    const Instance a = aatb(random_dims(rng, 3, 20, 1200));
    for (const Algorithm& alg : aatb_algs)
      CHECK(flop_count_algorithm(alg, a) == aatb_closed_form(alg.id, a.dims));
  }
}

TEST_CASE("no overflow at dims up to 1e6") {
  const std::vector<Dim> huge(5, 1000000);
  const Instance inst = chain4(huge);
  for (const Algorithm& alg : enumerate_algorithms(ExpressionKind::matrix_chain(4))) {
    const FlopCount count = flop_count_algorithm(alg, inst);
    CHECK(count == chain_closed_form(alg.id, huge));
    CHECK(flops_to_string(count) == "6000000000000000000");
  }
  // Seven-matrix chain at 1e6 exceeds 64-bit range but stays exact.
  const std::vector<Dim> huge8(8, 1000000);
  const Instance big(ExpressionKind::matrix_chain(7), huge8);
  const auto algs = enumerate_algorithms(ExpressionKind::matrix_chain(7));
  CHECK(flop_count_algorithm(algs[0], big) == FlopCount(2000000000000000000LL) * 6);
  CHECK(flops_to_string(flop_count_algorithm(algs[0], big)) == "12000000000000000000");
  CHECK_THROWS_AS(flops_to_int64(flop_count_algorithm(algs[0], big)), std::overflow_error);
}

TEST_CASE("min_flops_chain_dp") {
  CHECK(min_flops_chain_dp({2, 3, 4}) == 48);
  CHECK(min_flops_chain_dp({2, 3, 4, 5, 6}) == 248);
  CHECK_THROWS_AS(min_flops_chain_dp({5}), std::invalid_argument);

  // All-equal dims: every order costs 3 multiplications of 2k^3.
  for (Dim k : {2, 10, 100}) {
    const std::vector<Dim> dims(5, k);
    const FlopCount expected = 6 * FlopCount(k) * k * k;
    CHECK(min_flops_chain_dp(dims) == expected);
    FlopCount best = -1;
    for (const Algorithm& alg : enumerate_algorithms(ExpressionKind::matrix_chain(4))) {
      const FlopCount f = flop_count_algorithm(alg, chain4(dims));
      best = best < 0 ? f : std::min(best, f);
    }
    CHECK(best == expected);
  }
}

TEST_CASE("order enumeration attains the DP minimum (1000 seeded instances)") {
  std::mt19937_64 rng(4242);
  const auto algs = enumerate_algorithms(ExpressionKind::matrix_chain(4));
  for (int i = 0; i < 1000; ++i) {
    const std::vector<Dim> dims = random_dims(rng, 5, 20, 1200);
    FlopCount best = -1;
    for (const Algorithm& alg : algs) {
      const FlopCount f = flop_count_algorithm(alg, chain4(dims));
      best = best < 0 ? f : std::min(best, f);
    }
    CHECK(best == min_flops_chain_dp(dims));
  }
}

TEST_CASE("distinct parenthesizations equal the Catalan numbers") {
  const long catalan[] = {1, 1, 2, 5, 14, 42, 132};
  for (int n = 2; n <= 7; ++n) {
    std::set<std::string> trees;
    for (const Algorithm& alg : enumerate_algorithms(ExpressionKind::matrix_chain(n)))
      trees.insert(tree_key(alg));
    CHECK(trees.size() == static_cast<size_t>(catalan[n - 1]));
  }
}

TEST_CASE("step sequences are executable in order") {
  auto check_executable = [](const Algorithm& alg, const ExpressionKind& kind) {
    std::set<int> produced;
    for (const StepSpec& s : alg.steps) {
      for (const OperandRef& in : s.inputs) {
        if (in.source == OperandRef::Source::Operand) {
          CHECK(in.index >= 0);
          CHECK(in.index < kind.operand_count());
        } else {
          CHECK(produced.count(in.index) == 1);
        }
      }
      CHECK(produced.count(s.output) == 0);
      produced.insert(s.output);
    }
  };
  for (int n = 2; n <= 6; ++n) {
    const ExpressionKind kind = ExpressionKind::matrix_chain(n);
    for (const Algorithm& alg : enumerate_algorithms(kind)) check_executable(alg, kind);
  }
  for (const Algorithm& alg : enumerate_algorithms(ExpressionKind::aatb()))
    check_executable(alg, ExpressionKind::aatb());
}

TEST_CASE("cheapest_set") {
  const auto aatb_algs = enumerate_algorithms(ExpressionKind::aatb());
  // (100, 50, 60): algorithm 5's 4*d0*d1*d2 = 1,200,000 undercuts 1/2 at
  // 1,705,000 and 3/4 at 2,200,000.
  CHECK(cheapest_set(aatb_algs, aatb({100, 50, 60})) == std::vector<int>{5});

  // Interior-minimal d2 makes algorithms 2 and 5 (equal counts) cheapest.
  const auto chain_algs = enumerate_algorithms(ExpressionKind::matrix_chain(4));
  CHECK(cheapest_set(chain_algs, chain4({100, 100, 5, 100, 100})) == std::vector<int>{2, 5});

  const auto single = enumerate_algorithms(ExpressionKind::matrix_chain(2));
  CHECK(cheapest_set(single, Instance(ExpressionKind::matrix_chain(2), {3, 4, 5})) ==
        std::vector<int>{1});

  CHECK_THROWS_AS(cheapest_set({}, aatb({1, 1, 1})), std::invalid_argument);
}
