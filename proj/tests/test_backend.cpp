#include "flopscope/backend.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "flopscope/measure.hpp"
#include "flopscope/synthetic.hpp"
#include "test_support.hpp"

#ifdef FLOPSCOPE_HAVE_CBLAS
#include "flopscope/cblas_backend.hpp"
#endif

using namespace flopscope;

namespace {

// An effectively flat curve: exp(-d/tau) underflows to zero for any d >= 1,
// so e(d) == e_max exactly.
KernelCurve flat_curve(double e_max) { return KernelCurve{e_max, 1e-3, {}}; }

Instance single_gemm_instance(Dim m, Dim k, Dim n) {
  return Instance(ExpressionKind::matrix_chain(2), {m, k, n});
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS((MachineConfig{0.0, 1, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((MachineConfig{1e9, 0, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((MachineConfig{1e9, 1, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((MeasurementProtocol{0, true, 4.0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((MeasurementProtocol{10, true, 0.0}.validate()), std::invalid_argument);
  MeasurementProtocol{}.validate();
}

TEST_CASE("median") {
  CHECK(median({3.0}) == 3.0);
  CHECK(median({1.0, 2.0, 9.0}) == 2.0);
  CHECK(median({1.0, 2.0, 3.0, 10.0}) == 2.5);
  CHECK_THROWS_AS(median({}), std::invalid_argument);

  // Order-insensitive under seeded shuffles.
  std::mt19937_64 rng(11);
  std::vector<double> xs{0.4, 1.5, 0.9, 2.2, 0.1, 0.7, 3.0, 1.1, 0.2, 0.8};
  const double reference = median(xs);
  for (int i = 0; i < 50; ++i) {
    std::shuffle(xs.begin(), xs.end(), rng);
    CHECK(median(xs) == reference);
  }
}

TEST_CASE("efficiency") {
  CHECK(efficiency(2000000000LL, 1.0, 4e9) == doctest::Approx(0.5));
  CHECK(efficiency(0, 1.0, 1e9) == 0.0);
  CHECK_THROWS_AS(efficiency(100, 0.0, 1e9), std::invalid_argument);
  CHECK_THROWS_AS(efficiency(100, -1.0, 1e9), std::invalid_argument);
  // Above-peak values come back unclamped.
  CHECK(efficiency(4000000000LL, 1.0, 2e9) == doctest::Approx(2.0));
  // Doubling the peak halves the value.
  CHECK(efficiency(100000, 0.25, 2e9) == doctest::Approx(0.5 * efficiency(100000, 0.25, 1e9)));
}

TEST_CASE("kernel curve shape and overrides") {
  KernelCurve c{0.8, 100.0, {}};
  CHECK(c.at(1) == doctest::Approx(0.8 * (1 - std::exp(-0.01))));
  CHECK(c.at(10000) == doctest::Approx(0.8));
  CHECK(c.at(50) < c.at(500));

  c.overrides = {{300, 0.4}, {600, 0.9}};
  CHECK(c.at(299) == doctest::Approx(0.8 * (1 - std::exp(-2.99))));
  CHECK(c.at(300) == doctest::Approx(0.4 * (1 - std::exp(-3.0))));
  CHECK(c.at(5000) == doctest::Approx(0.9));

  CHECK_THROWS_AS((KernelCurve{0.0, 1.0, {}}.validate("x")), std::invalid_argument);
  CHECK_THROWS_AS((KernelCurve{1.2, 1.0, {}}.validate("x")), std::invalid_argument);
  CHECK_THROWS_AS((KernelCurve{0.5, 0.0, {}}.validate("x")), std::invalid_argument);
  KernelCurve bad{0.5, 1.0, {{100, 0.3}, {100, 0.4}}};
  CHECK_THROWS_AS(bad.validate("x"), std::invalid_argument);
}

TEST_CASE("synthetic model: constant profile, 2e6-FLOP algorithm") {
  SyntheticBackend backend({1e9, 1 << 20, 1}, EfficiencyProfile::uniform(flat_curve(0.5), 1e9));
  const auto algs = enumerate_algorithms(ExpressionKind::matrix_chain(2));
  const Instance inst = single_gemm_instance(100, 100, 100);  // 2e6 FLOPs

  const AlgorithmTiming t = measure_algorithm(backend, algs[0], inst, MeasurementProtocol{});
  CHECK(t.total.flops == 2000000);
  CHECK(t.total.median_seconds == doctest::Approx(4e-3).epsilon(1e-12));
  CHECK(t.total.efficiency == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t.total.raw_seconds.size() == 10);
  CHECK(t.per_step.size() == 1);
  CHECK_FALSE(t.total.timer_warning);
  CHECK_FALSE(t.total.efficiency_suspicious);
}

TEST_CASE("synthetic isolated call: 1000^3 GEMM at e = 0.8") {
  SyntheticBackend backend({1e9, 1 << 20, 1}, EfficiencyProfile::uniform(flat_curve(0.8), 1e9));
  Step gemm{StepKind::Gemm, false, false, 1000, 1000, 1000, {}, 1};
  const TimingSample s = measure_call_isolated(backend, gemm, MeasurementProtocol{});
  CHECK(s.median_seconds == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(s.efficiency == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("synthetic determinism and additivity") {
  EfficiencyProfile profile;
  profile.gemm = KernelCurve{0.9, 150.0, {}};
  profile.syrk = KernelCurve{0.6, 220.0, {}};
  profile.symm = KernelCurve{0.5, 180.0, {}};
  profile.copy_bandwidth = 3e9;
  SyntheticBackend backend({2e9, 1 << 20, 1}, profile);
  const MeasurementProtocol protocol{5, true, 4.0};

  const auto algs = enumerate_algorithms(ExpressionKind::aatb());
  const Instance inst(ExpressionKind::aatb(), {64, 150, 80});

  for (const Algorithm& alg : algs) {
    const AlgorithmTiming a = measure_algorithm(backend, alg, inst, protocol);
    const AlgorithmTiming b = measure_algorithm(backend, alg, inst, protocol);
    CHECK(a.total.median_seconds == b.total.median_seconds);  // bit-identical
    CHECK(a.total.raw_seconds == b.total.raw_seconds);

    // Algorithm time is exactly the sum of its isolated step times.
    double sum = 0.0;
    for (const Step& step : bind_steps(alg, inst))
      sum += measure_call_isolated(backend, step, protocol).median_seconds;
    CHECK(a.total.median_seconds == sum);
  }
}

TEST_CASE("synthetic copy step charged by bytes over bandwidth") {
  EfficiencyProfile profile = EfficiencyProfile::uniform(flat_curve(0.5), 2e9);
  SyntheticBackend backend({1e9, 1 << 20, 1}, profile);
  Step copy{StepKind::CopyTriangleToFull, false, false, 1000, 0, 0, {}, 1};
  CHECK(backend.model_step_seconds(copy) == doctest::Approx(1000.0 * 1000.0 * 8.0 / 2e9));

  // Algorithm 2 pays for the copy; algorithm 1 does not.
  const auto algs = enumerate_algorithms(ExpressionKind::aatb());
  const Instance inst(ExpressionKind::aatb(), {1000, 100, 100});
  const MeasurementProtocol protocol{1, true, 4.0};
  const double t1 = measure_algorithm(backend, algs[0], inst, protocol).total.median_seconds;
  const double t2 = measure_algorithm(backend, algs[1], inst, protocol).total.median_seconds;
  CHECK(t2 - t1 == doctest::Approx(1000.0 * 1000.0 * 8.0 / 2e9).epsilon(1e-9));
}

TEST_CASE("synthetic noise: reproducible per seed, zero noise is exact") {
  EfficiencyProfile profile = EfficiencyProfile::uniform(flat_curve(0.5), 1e9);
  profile.noise_stddev = 0.05;
  profile.rng_seed = 99;
  const Instance inst = single_gemm_instance(50, 50, 50);
  const auto algs = enumerate_algorithms(ExpressionKind::matrix_chain(2));
  const MeasurementProtocol protocol{10, true, 4.0};

  SyntheticBackend b1({1e9, 1 << 20, 1}, profile);
  SyntheticBackend b2({1e9, 1 << 20, 1}, profile);
  const AlgorithmTiming t1 = measure_algorithm(b1, algs[0], inst, protocol);
  const AlgorithmTiming t2 = measure_algorithm(b2, algs[0], inst, protocol);
  CHECK(t1.total.raw_seconds == t2.total.raw_seconds);
  // Noise makes repetitions differ.
  CHECK(*std::min_element(t1.total.raw_seconds.begin(), t1.total.raw_seconds.end()) <
        *std::max_element(t1.total.raw_seconds.begin(), t1.total.raw_seconds.end()));
}

TEST_CASE("repetitions = 1: median equals the single raw sample") {
  SyntheticBackend backend({1e9, 1 << 20, 1}, EfficiencyProfile::uniform(flat_curve(0.5), 1e9));
  Step gemm{StepKind::Gemm, false, false, 64, 64, 64, {}, 1};
  const TimingSample s = measure_call_isolated(backend, gemm, MeasurementProtocol{1, true, 4.0});
  CHECK(s.raw_seconds.size() == 1);
  CHECK(s.median_seconds == s.raw_seconds[0]);
}

TEST_CASE("measurement protocol drives the flush sequence") {
  testing::FakeBackend backend;
  const auto algs = enumerate_algorithms(ExpressionKind::matrix_chain(4));
  const Instance inst(ExpressionKind::matrix_chain(4), {8, 8, 8, 8, 8});

  measure_algorithm(backend, algs[0], inst, MeasurementProtocol{10, true, 4.0});
  CHECK(backend.flushes == 10);  // once per repetition, none between steps
  CHECK(backend.calls == 30);

  backend.flushes = 0;
  measure_algorithm(backend, algs[0], inst, MeasurementProtocol{10, false, 4.0});
  CHECK(backend.flushes == 0);

  backend.flushes = 0;
  backend.calls = 0;
  Step gemm{StepKind::Gemm, false, false, 8, 8, 8, {}, 1};
  measure_call_isolated(backend, gemm, MeasurementProtocol{7, true, 4.0});
  CHECK(backend.flushes == 7);  // flushed before every call
  CHECK(backend.calls == 7);
}

TEST_CASE("suspicious efficiency is flagged, not clamped") {
  testing::FakeBackend backend;  // peak 1e9
  backend.step_time = [](const Step& s) {
    return static_cast<double>(flop_count_step(s)) / 2e9;  // twice the peak rate
  };
  Step gemm{StepKind::Gemm, false, false, 100, 100, 100, {}, 1};
  const TimingSample s = measure_call_isolated(backend, gemm, MeasurementProtocol{3, true, 4.0});
  CHECK(s.efficiency == doctest::Approx(2.0));
  CHECK(s.efficiency_suspicious);
}

TEST_CASE("zero-duration samples warn instead of throwing") {
  testing::FakeBackend backend;
  backend.step_time = [](const Step&) { return 0.0; };
  Step copy{StepKind::CopyTriangleToFull, false, false, 10, 0, 0, {}, 1};
  const TimingSample s = measure_call_isolated(backend, copy, MeasurementProtocol{3, true, 4.0});
  CHECK(s.timer_warning);
  CHECK(s.efficiency == 0.0);
}

#ifdef FLOPSCOPE_HAVE_CBLAS

namespace {

// Naive column-major helpers for numerical references.
std::vector<double> naive_matmul(const std::vector<double>& a, Dim m, Dim k,
                                 const std::vector<double>& b, Dim n) {
  std::vector<double> c(static_cast<size_t>(m) * n, 0.0);
  for (Dim j = 0; j < n; ++j)
    for (Dim l = 0; l < k; ++l)
      for (Dim i = 0; i < m; ++i)
        c[static_cast<size_t>(i) + static_cast<size_t>(j) * m] +=
            a[static_cast<size_t>(i) + static_cast<size_t>(l) * m] *
            b[static_cast<size_t>(l) + static_cast<size_t>(j) * k];
  return c;
}

std::vector<double> naive_aat(const std::vector<double>& a, Dim m, Dim k) {
  std::vector<double> c(static_cast<size_t>(m) * m, 0.0);
  for (Dim j = 0; j < m; ++j)
    for (Dim i = 0; i < m; ++i) {
      double sum = 0.0;
      for (Dim l = 0; l < k; ++l)
        sum += a[static_cast<size_t>(i) + static_cast<size_t>(l) * m] *
               a[static_cast<size_t>(j) + static_cast<size_t>(l) * m];
      c[static_cast<size_t>(i) + static_cast<size_t>(j) * m] = sum;
    }
  return c;
}

double max_abs_diff(const std::vector<double>& x, const std::vector<double>& y) {
  REQUIRE(x.size() == y.size());
  double worst = 0.0;
  for (size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
  return worst;
}

}  // namespace

TEST_CASE("cblas backend: every algorithm computes the same product") {
  CblasBackend backend({1e9, 1 << 20, 1});

  const Instance chain(ExpressionKind::matrix_chain(4), {7, 3, 5, 4, 6});
  const auto ops = backend.operand_buffers(chain);
  std::vector<double> expected = naive_matmul(ops[0], 7, 3, ops[1], 5);
  expected = naive_matmul(expected, 7, 5, ops[2], 4);
  expected = naive_matmul(expected, 7, 4, ops[3], 6);
  for (const Algorithm& alg : enumerate_algorithms(chain.kind)) {
    const auto result = backend.compute_result(bind_steps(alg, chain), chain);
    CHECK(max_abs_diff(result, expected) < 1e-10);
  }

  const Instance aatb(ExpressionKind::aatb(), {6, 4, 5});
  const auto aatb_ops = backend.operand_buffers(aatb);
  const std::vector<double> m = naive_aat(aatb_ops[0], 6, 4);
  const std::vector<double> expected2 = naive_matmul(m, 6, 6, aatb_ops[1], 5);
  for (const Algorithm& alg : enumerate_algorithms(aatb.kind)) {
    const auto result = backend.compute_result(bind_steps(alg, aatb), aatb);
    CHECK(max_abs_diff(result, expected2) < 1e-10);
  }
}

TEST_CASE("cblas backend: flush buffer sized by multiplier x llc") {
  CblasBackend backend({1e9, 14 * (1 << 20), 1});
  backend.flush_cache(MeasurementProtocol{10, true, 4.0});
  CHECK(backend.flush_buffer_bytes() == static_cast<size_t>(56) * (1 << 20));
}

TEST_CASE("cblas backend: measurement smoke") {
  CblasBackend backend({1e9, 1 << 20, 1});
  const Instance inst(ExpressionKind::aatb(), {32, 24, 40});
  const MeasurementProtocol protocol{3, true, 1.0};
  for (const Algorithm& alg : enumerate_algorithms(inst.kind)) {
    const AlgorithmTiming t = measure_algorithm(backend, alg, inst, protocol);
    CHECK(t.total.raw_seconds.size() == 3);
    CHECK(t.total.median_seconds > 0.0);
    CHECK(t.per_step.size() == bind_steps(alg, inst).size());
  }
}

#endif  // FLOPSCOPE_HAVE_CBLAS
