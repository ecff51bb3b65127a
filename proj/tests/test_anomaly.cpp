#include "flopscope/anomaly.hpp"

#include <random>

#include "doctest.h"

using namespace flopscope;

namespace {

Instance some_instance() { return Instance(ExpressionKind::aatb(), {100, 100, 100}); }

std::vector<AlgorithmResult> results(std::initializer_list<AlgorithmResult> rs) { return rs; }

}  // namespace

TEST_CASE("time_score and flop_score formulas") {
  CHECK(time_score(1.0, 0.8) == doctest::Approx(0.20));
  CHECK(time_score(0.5, 0.5) == 0.0);
  CHECK_THROWS_AS(time_score(0.8, 1.0), std::logic_error);  // fastest must be the global min
  CHECK_THROWS_AS(time_score(1.0, 0.0), std::invalid_argument);

  CHECK(flop_score(200, 150) == doctest::Approx(0.25));
  CHECK(flop_score(100, 100) == 0.0);
  // 45% more FLOPs on the fastest side: score 0.45/1.45.
  CHECK(flop_score(145, 100) == doctest::Approx(0.45 / 1.45));
  CHECK_THROWS_AS(flop_score(100, 200), std::logic_error);
  CHECK_THROWS_AS(flop_score(100, 0), std::invalid_argument);
}

TEST_CASE("thresholds validate") {
  Thresholds{0.0}.validate();
  Thresholds{0.10}.validate();
  CHECK_THROWS_AS(Thresholds{-0.1}.validate(), std::invalid_argument);
  CHECK_THROWS_AS(Thresholds{1.0}.validate(), std::invalid_argument);
}

TEST_CASE("classify: anomaly when the sets are disjoint and the score clears") {
  // Cheapest {6}, fastest {4}, time score 0.12.
  const Verdict v = classify(some_instance(),
                             results({{4, 1200, 0.88, 0.0}, {6, 1000, 1.0, 0.0}}),
                             Thresholds{0.10});
  CHECK(v.cheapest_ids == std::vector<int>{6});
  CHECK(v.fastest_ids == std::vector<int>{4});
  CHECK(v.time_score == doctest::Approx(0.12));
  CHECK(v.flop_score == doctest::Approx(200.0 / 1200.0));
  CHECK(v.is_anomaly);
}

TEST_CASE("classify: intersecting sets are never anomalous") {
  // Cheapest {2, 5}, fastest {5}: intersection nonempty, score exactly 0.
  const Verdict v = classify(
      some_instance(),
      results({{2, 100, 2.0, 0.0}, {5, 100, 1.5, 0.0}, {1, 300, 1.9, 0.0}}), Thresholds{0.10});
  CHECK(v.cheapest_ids == std::vector<int>{2, 5});
  CHECK(v.fastest_ids == std::vector<int>{5});
  CHECK_FALSE(v.is_anomaly);
  CHECK(v.time_score == 0.0);
  CHECK(v.flop_score == 0.0);
}

TEST_CASE("classify: disjoint but below threshold") {
  const Verdict v = classify(some_instance(),
                             results({{1, 100, 1.0, 0.0}, {2, 200, 0.97, 0.0}}), Thresholds{0.10});
  CHECK(v.cheapest_ids == std::vector<int>{1});
  CHECK(v.fastest_ids == std::vector<int>{2});
  CHECK(v.time_score == doctest::Approx(0.03));
  CHECK_FALSE(v.is_anomaly);
}

TEST_CASE("classify: errors") {
  CHECK_THROWS_AS(classify(some_instance(), {}, Thresholds{0.1}), std::invalid_argument);
  CHECK_THROWS_AS(
      classify(some_instance(), results({{1, 100, 0.0, 0.0}}), Thresholds{0.1}),
      std::invalid_argument);
}

TEST_CASE("classify: scale invariance of seconds and flops") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> seconds_dist(0.1, 2.0);
  std::uniform_int_distribution<std::int64_t> flops_dist(1000, 100000);
  std::uniform_real_distribution<double> scale_dist(0.001, 1000.0);

  for (int trial = 0; trial < 200; ++trial) {
    std::vector<AlgorithmResult> base;
    const int n = 2 + static_cast<int>(rng() % 6);
    for (int id = 1; id <= n; ++id) base.push_back({id, flops_dist(rng), seconds_dist(rng), 0.0});

    const Verdict v0 = classify(some_instance(), base, Thresholds{0.05});
    CHECK(v0.time_score >= 0.0);
    CHECK(v0.time_score <= 1.0);
    CHECK(v0.flop_score >= 0.0);
    CHECK(v0.flop_score <= 1.0);

    // Same inputs, same verdict (purity).
    const Verdict v1 = classify(some_instance(), base, Thresholds{0.05});
    CHECK(v1.cheapest_ids == v0.cheapest_ids);
    CHECK(v1.fastest_ids == v0.fastest_ids);
    CHECK(v1.time_score == v0.time_score);
    CHECK(v1.is_anomaly == v0.is_anomaly);

    // Scaling all seconds by a positive constant changes nothing.
    const double s = scale_dist(rng);
    std::vector<AlgorithmResult> scaled = base;
    for (auto& r : scaled) r.seconds *= s;
    const Verdict v2 = classify(some_instance(), scaled, Thresholds{0.05});
    CHECK(v2.cheapest_ids == v0.cheapest_ids);
    CHECK(v2.fastest_ids == v0.fastest_ids);
    CHECK(v2.time_score == doctest::Approx(v0.time_score).epsilon(1e-12));
    CHECK(v2.is_anomaly == v0.is_anomaly);

    // Scaling all FLOP counts preserves the cheapest set and the flop score.
    std::vector<AlgorithmResult> fscaled = base;
    for (auto& r : fscaled) r.flops *= 7;
    const Verdict v3 = classify(some_instance(), fscaled, Thresholds{0.05});
    CHECK(v3.cheapest_ids == v0.cheapest_ids);
    CHECK(v3.flop_score == doctest::Approx(v0.flop_score).epsilon(1e-12));
  }
}

TEST_CASE("classify: threshold zero separates anomalies by argmin disagreement") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> seconds_dist(0.1, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<AlgorithmResult> rs;
    for (int id = 1; id <= 5; ++id)
      rs.push_back({id, 1000 + 13 * id * id + static_cast<std::int64_t>(rng() % 7) * 131,
                    seconds_dist(rng), 0.0});
    const Verdict v = classify(some_instance(), rs, Thresholds{0.0});

    int argmin_flops = 1, argmin_seconds = 1;
    for (const auto& r : rs) {
      if (r.flops < rs[static_cast<size_t>(argmin_flops) - 1].flops) argmin_flops = r.id;
      if (r.seconds < rs[static_cast<size_t>(argmin_seconds) - 1].seconds) argmin_seconds = r.id;
    }
    // Generic (tie-free) trials: anomaly iff the argmins disagree.
    if (v.cheapest_ids.size() == 1 && v.fastest_ids.size() == 1)
      CHECK(v.is_anomaly == (argmin_flops != argmin_seconds));
  }
}
