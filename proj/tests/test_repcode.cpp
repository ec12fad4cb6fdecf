#include <doctest.h>

#include <cmath>

#include "qbayes/repcode.hpp"

using namespace qbayes;

TEST_SUITE("repcode") {
TEST_CASE("copy counts") {
  CHECK(required_copies(0.5, 1.0, 0.05, 0.01) == 2764);
  CHECK(required_copies_sequential(0.5, 1.0, 0.05, 10, 0.01) == 5527);
  CHECK(sequential_plan(0.5, 1.0, 0.05, 10, 0.01).copies == 5527);
  CHECK(sequential_plan(0.5, 1.0, 0.05, 10, 0.01).round_failure() == doctest::Approx(1e-4));
  CHECK(chernoff_tail(0.5, 1.0, 0.05, 2764) <= 0.01);
  CHECK(chernoff_tail(0.5, 1.0, 0.05, 2763) > 0.01 - 1e-6);
}

TEST_CASE("exact register for two copies") {
  LatticeDistribution d{0.0, 1.0, {0.5, 0.5}};
  CHECK(d.mean() == doctest::Approx(0.5));
  CHECK(d.max_value() == doctest::Approx(1.0));
  const auto reg = mean_register_distribution(d, 2, 0.5, 0);
  REQUIRE(reg.exact);
  REQUIRE(reg.mass.size() == 3);
  CHECK(reg.mass[0] == doctest::Approx(0.25));
  CHECK(reg.mass[1] == doctest::Approx(0.5));
  CHECK(reg.mass[2] == doctest::Approx(0.25));
  CHECK(reg.means[1] == doctest::Approx(0.5));
  CHECK(reg.window_mass(0.5, 0.1) == doctest::Approx(0.5));
  CHECK(reg.window_stderr(0.5, 0.1) == 0.0);
}

TEST_CASE("monte carlo register") {
  LatticeDistribution d{0.0, 1.0, {0.5, 0.5}};
  CHECK_THROWS_AS(mean_register_distribution(d, 200, 0.01, 1, 1000), std::invalid_argument);
  const auto reg = mean_register_distribution(d, 200, 0.01, 1);
  CHECK_FALSE(reg.exact);
  CHECK(reg.draws == 100000);
  const double w = reg.window_mass(0.5, 0.1);
  CHECK(w > 0.99);
  CHECK(reg.window_stderr(0.5, 0.1) >= 0.0);
  const auto again = mean_register_distribution(d, 200, 0.01, 1);
  CHECK(again.mass == reg.mass);
}

TEST_CASE("conditioning on a full window changes nothing") {
  LatticeDistribution d{0.0, 0.25, {0.1, 0.2, 0.3, 0.4}};
  CHECK(conditional_marginal_tv(d, 8, d.mean(), 10.0) == doctest::Approx(0.0).epsilon(1e-12));
  const double narrow = conditional_marginal_tv(d, 8, d.mean(), 0.02);
  CHECK(narrow > 0.0);
  CHECK(narrow < 1.0);
}

TEST_CASE("protected rounds") {
  const HypothesisGrid g(1, 4);
  const auto lat = lattice_of(DiscreteDistribution::uniform(g));
  CHECK(lat.step == doctest::Approx(1.0 / 16));
  CHECK(lat.origin == doctest::Approx(1.0 / 32));
  const auto plan = sequential_plan(lat.mean(), lat.max_value(), 0.05, 5, 0.01);
  const auto reg = mean_register_distribution(lat, plan.copies, 0.01, 2);
  Rng r(3);
  const auto res = simulate_protected_rounds(lat, plan, reg, r);
  CHECK(res.overlap.size() == 5);
  CHECK(res.failures == 0);
  for (double m : res.mean) CHECK(std::abs(m - 0.5) <= 0.05);
}
}
