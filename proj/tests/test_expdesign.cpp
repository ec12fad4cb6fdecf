#include <doctest.h>

#include <cmath>

#include "qbayes/errors.hpp"
#include "qbayes/exact_bayes.hpp"
#include "qbayes/expdesign.hpp"

using namespace qbayes;

namespace {
LikelihoodModel small_model(const HypothesisGrid& g) {
  return make_table_model(g, {{0.1, 0.4, 0.7, 0.8}, {0.9, 0.6, 0.3, 0.2}}, std::vector<double>{1.0, 1.0});
}
DiscreteDistribution small_prior(const HypothesisGrid& g) { return DiscreteDistribution(g, {0.1, 0.2, 0.3, 0.4}); }
}  // namespace

TEST_SUITE("expdesign") {
TEST_CASE("noiseless terms reproduce the exact utility") {
  const HypothesisGrid g(1, 2);
  const auto m = small_model(g);
  Rng r(1);
  const auto u = utility_quantum(small_prior(g), m, 0.01, r, {EstimatorKind::exact});
  CHECK(u.value == doctest::Approx(-0.049660441426146104).epsilon(1e-12));
  CHECK(u.term2 == doctest::Approx(u.term3).epsilon(1e-12));
}

TEST_CASE("estimated utility within its bound") {
  const HypothesisGrid g(1, 2);
  const double exact = utility_exact(small_prior(g), small_model(g)).value;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto m = small_model(g);
    Rng r(s);
    const auto u = utility_quantum(small_prior(g), m, 0.02, r);
    CHECK(std::abs(u.value - exact) <= u.bound_factor * u.epsilon0);
    CHECK(u.oracle_queries == m.oracle_queries());
  }
}

TEST_CASE("evidence floor") {
  const HypothesisGrid g(1, 2);
  Rng r(2);
  CHECK_THROWS_AS(utility_quantum(small_prior(g), small_model(g), 0.4, r), FloorViolation);
  CHECK_THROWS_AS(estimate_evidence_prob(small_prior(g), small_model(g), 0, 0.2, {}, r, 0.1), FloorViolation);
}

TEST_CASE("budget formulas") {
  CHECK(gradient_budget(0.05, 1.0) == doctest::Approx(std::pow(0.05, 1.5)));
  CHECK(gradient_budget(0.05, 4.0) == doctest::Approx(std::pow(0.05, 1.5) / 2));
  CHECK(gradient_step(8e-6, 1.0) == doctest::Approx(0.02));
}

TEST_CASE("noiseless gradient matches centered differences") {
  const HypothesisGrid g(1, 4);
  const auto prior = DiscreteDistribution::uniform(g);
  const auto fam = precession_family(g, 0.0);
  const ExperimentControl c{1.3};
  Rng r(3);
  const auto q = gradient_quantum(prior, fam, c, 0.05, 1.0, r, {EstimatorKind::exact});
  const double h = q.step;
  const double up = utility_exact(prior, fam(ExperimentControl{1.3 + h})).value;
  const double dn = utility_exact(prior, fam(ExperimentControl{1.3 - h})).value;
  CHECK(q.value[0] == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-8));
}

TEST_CASE("ascent lowers the risk") {
  const HypothesisGrid g(1, 5);
  const auto prior = DiscreteDistribution::uniform(g);
  const auto fam = precession_family(g, 0.0);
  Rng r(4);
  const auto a = design_ascent(prior, fam, ExperimentControl{0.5}, 10, 5.0, 0.05, 1.0, r, ExperimentControl{0.0},
                               ExperimentControl{4.0});
  REQUIRE(a.risk.size() == 11);
  CHECK(a.risk.back() < a.risk.front());
  CHECK(a.controls.size() == 11);
}
}
