#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "qbayes/amp.hpp"
#include "qbayes/exact_bayes.hpp"

using namespace qbayes;

TEST_SUITE("amp") {
TEST_CASE("grover power rotates the mixing angle") {
  const auto b = branch_from_probability(0.25);
  CHECK(b.theta == doctest::Approx(std::numbers::pi / 6));
  CHECK(grover_power(b, 1).a == doctest::Approx(1.0));
  CHECK(grover_power(b, 0).a == doctest::Approx(0.25));
  CHECK(branch_from_probability(0.0).degenerate);
  CHECK_THROWS_AS(branch_from_probability(1.5), std::invalid_argument);
}

TEST_CASE("estimation distribution") {
  const auto p = estimation_distribution(std::asin(std::sqrt(0.3)), 3);
  const double expect[] = {0.051788800000000003, 0.23627768229165802, 0.19420799999999991, 0.032522317708342026,
                           0.022195199999999998, 0.032522317708342026, 0.19420799999999991, 0.23627768229165802};
  for (int y = 0; y < 8; ++y) CHECK(p[y] == doctest::Approx(expect[y]).epsilon(1e-12));
  CHECK(std::accumulate(p.begin(), p.end(), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("exact phase gives an exact estimate") {
  // a = 1/2: theta/pi = 1/4, so y = M/4 or 3M/4 with certainty.
  const auto b = branch_from_probability(0.5);
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng r(s);
    const auto o = amplitude_estimate(b, 3, 1, r);
    CHECK(o.estimate == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(o.grover_applications == 7);
    CHECK(o.unitary_calls == 15);
  }
  Rng r(0);
  CHECK_THROWS_AS(amplitude_estimate(b, 3, 2, r), std::invalid_argument);
}

TEST_CASE("bounds and sizing") {
  CHECK(estimation_error_bound(0.5, 8) ==
        doctest::Approx(std::numbers::pi / 256 + std::numbers::pi * std::numbers::pi / 65536));
  const int t = bits_for_error(1e-3);
  CHECK(estimation_error_bound(0.5, t) <= 1e-3);
  CHECK(estimation_error_bound(0.5, t - 1) > 1e-3);
  CHECK(amplification_rounds(0.01) == 7);
  CHECK(amplification_rounds(0.02) == 5);
  CHECK(amplification_rounds(0.25) == 1);
  CHECK(invert_amplified(1.0, 1) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("amplify and invert round trip") {
  Rng r(1);
  for (int i = 0; i < 100; ++i) {
    const double a = 1e-4 + 0.4 * r.uniform();
    const auto b = branch_from_probability(a);
    const int m_max = static_cast<int>(std::floor((std::numbers::pi / (2 * b.theta) - 1) / 2));
    const int m = static_cast<int>(r.below(m_max + 1));
    CHECK(invert_amplified(grover_power(b, m).a, m) == doctest::Approx(a).epsilon(1e-10));
  }
}

TEST_CASE("prior-amplified estimation") {
  Rng r(2);
  CHECK_THROWS_AS(prior_amplified_estimate(branch_from_probability(0.02), 0.01, 1e-3, r), std::invalid_argument);
  const auto o = prior_amplified_estimate(branch_from_probability(0.004), 0.01, 2e-4, r);
  CHECK(o.m == 7);
  CHECK(std::abs(o.estimate - 0.004) <= 2e-4);
}

TEST_CASE("repeat until success") {
  Rng r(3);
  const auto run = amplify_until_success(branch_from_probability(0.25), r);
  CHECK(run.attempts == 1);
  CHECK(run.grover_count == 1);

  const HypothesisGrid g(1, 2);
  const auto m = make_table_model(g, {{0.1, 0.2, 0.3, 0.4}}, std::vector<double>{1.0});
  const std::size_t ev[] = {0};
  const auto prior = DiscreteDistribution::uniform(g);
  const auto h = coherent_update(prepare_state(prior), m, ev);
  const auto before = m.oracle_queries();
  const auto amp = amplify_until_success(h, all_heralds_one(h), m, r);
  const auto exact = bayes_update(prior, m, 0);
  const auto post = amp.post.hypothesis_marginal();
  for (std::size_t j = 0; j < 4; ++j) CHECK(post[j] == doctest::Approx(exact[j]).epsilon(1e-12));
  // P(E) = 0.25: theta = pi/6, one Grover step reaches certainty
  CHECK(amp.attempts == 1);
  CHECK(m.oracle_queries() - before == 3);
}

TEST_CASE("estimator kinds") {
  Rng r(4);
  CHECK(ProbabilityEstimator{EstimatorKind::exact}.estimate(0.3, 0.01, r).estimate == 0.3);
  const auto p = ProbabilityEstimator{EstimatorKind::perturbed}.estimate(0.3, 0.01, r).estimate;
  CHECK(std::abs(p - 0.3) <= 0.01);
  const auto e = ProbabilityEstimator{}.estimate(0.3, 0.01, r);
  CHECK(e.unitary_calls > 0);
}
}
