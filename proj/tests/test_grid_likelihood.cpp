#include <doctest.h>

#include <cmath>

#include "qbayes/errors.hpp"
#include "qbayes/grid.hpp"
#include "qbayes/likelihood.hpp"

using namespace qbayes;

TEST_SUITE("grid") {
TEST_CASE("centroids and packing") {
  const HypothesisGrid g(2, 3);
  CHECK(g.size() == 64);
  CHECK(g.coord(0, 0) == 0.0625);
  CHECK(g.coord(7, 0) == 0.9375);
  CHECK(g.coord(8, 1) == 0.1875);
  Eigen::VectorXd x(2);
  x << 0.99, 0.2;
  CHECK(g.nearest(x) == 7 + 8 * 1);
  CHECK_THROWS_AS(HypothesisGrid(0, 3), std::invalid_argument);
}

TEST_CASE("uniform moments match the closed form") {
  for (int n : {1, 4, 8}) {
    const auto m = moments(DiscreteDistribution::uniform(HypothesisGrid(1, n)));
    CHECK(m.mean[0] == doctest::Approx(0.5));
    CHECK(m.cov(0, 0) == doctest::Approx((1.0 - std::pow(4.0, -n)) / 12.0).epsilon(1e-12));
  }
}

TEST_CASE("distribution validation") {
  const HypothesisGrid g(1, 1);
  CHECK_THROWS_AS(DiscreteDistribution(g, {0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteDistribution(g, {1.5, -0.5}), std::invalid_argument);
  CHECK_THROWS_AS(DiscreteDistribution::normalized(g, {0, 0}), std::invalid_argument);
  const auto d = DiscreteDistribution::normalized(g, {1, 3});
  CHECK(d[1] == 0.75);
  CHECK(total_variation(d, DiscreteDistribution::uniform(g)) == doctest::Approx(0.25));
}

TEST_CASE("gaussian discretization") {
  const HypothesisGrid g(1, 8);
  Eigen::VectorXd mu(1);
  mu << 0.4;
  Eigen::MatrixXd s(1, 1);
  s << 0.05 * 0.05;
  const auto m = moments(discretize_gaussian(g, mu, s));
  CHECK(m.mean[0] == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(std::sqrt(m.cov(0, 0)) == doctest::Approx(0.05).epsilon(1e-3));
  s << -1;
  CHECK_THROWS_AS(discretize_gaussian(g, mu, s), std::invalid_argument);
}
}

TEST_SUITE("likelihood") {
TEST_CASE("query counters") {
  const HypothesisGrid g(1, 3);
  const auto m = make_precession_model(g, 0.0, 1.0);
  m.query(1, 0);
  CHECK(m.queries() == 1);
  m.row(0);
  CHECK(m.queries() == 9);
  m.charge_oracle(5);
  CHECK(m.oracle_queries() == 5);
  const LikelihoodModel copy = m;
  CHECK(copy.queries() == 9);
  m.reset_counters();
  CHECK(m.queries() == 0);
  CHECK(copy.queries() == 9);
  CHECK_THROWS_AS(m.query(2, 0), std::invalid_argument);
  CHECK_THROWS_AS(m.query(0, 8), std::invalid_argument);
}

TEST_CASE("precession values") {
  const HypothesisGrid g(1, 2);
  const auto m = make_precession_model(g, 0.1, 2.0);
  const double w = g.coord(2, 0);
  CHECK(m.query(1, 2) == doctest::Approx(std::pow(std::cos((w - 0.1) * 2.0), 2)));
  CHECK(m.query(0, 2) + m.query(1, 2) == doctest::Approx(1.0));
  CHECK_THROWS_AS(make_precession_model(g, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("gamma bounds") {
  const HypothesisGrid g(1, 1);
  const auto m = make_table_model(g, {{0.2, 0.7}, {0.8, 0.3}}, std::vector<double>{0.5, 1.0});
  CHECK_THROWS_AS(m.check_gamma(0), GammaViolation);
  CHECK_NOTHROW(m.check_gamma(1));
  try {
    m.check_gamma(0);
  } catch (const GammaViolation& e) {
    CHECK(e.index() == 1);
  }
  CHECK(make_table_model(g, {{0.2, 0.4}}).gamma(0) == 0.4);
}

TEST_CASE("controls") {
  const ExperimentControl c{1.0, 2.0};
  const auto s = c.shifted(1, 0.5);
  CHECK(s[0] == 1.0);
  CHECK(s[1] == 2.5);
  const auto fam = precession_family(HypothesisGrid(1, 2), 0.0);
  CHECK(fam(ExperimentControl{1.0}).query(1, 0) == doctest::Approx(std::pow(std::cos(0.125), 2)));
}
}
