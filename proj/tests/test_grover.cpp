#include <doctest.h>

#include <cmath>

#include "qbayes/grover_demo.hpp"

using namespace qbayes;

TEST_SUITE("grover") {
TEST_CASE("exact update concentrates on the marked items") {
  GroverInstance inst{8, {2, 5}};
  const auto r = grover_via_bayes(inst);
  CHECK(r.posterior[2] == doctest::Approx(0.5));
  CHECK(r.posterior[5] == doctest::Approx(0.5));
  CHECK(r.posterior[0] == 0.0);
  CHECK(r.queries == 8);
}

TEST_CASE("instance validation") {
  CHECK_THROWS_AS((GroverInstance{6, {1}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GroverInstance{8, {8}}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GroverInstance{8, {}}.validate()), std::invalid_argument);
  CHECK_NOTHROW((GroverInstance{8, {7}}.validate()));
}

TEST_CASE("doubling") {
  CHECK(doubling_step(0.25) == doctest::Approx(0.4));
  CHECK(doubling_step(1.0) == doctest::Approx(1.0));
}

TEST_CASE("noisy search trace") {
  GroverInstance inst{64, {7}, true};
  Rng r(1);
  const auto t = noisy_grover_inference(inst, r);
  REQUIRE(t.marked_probability.size() == t.updates + 1);
  CHECK(t.marked_probability[0] == doctest::Approx(1.0 / 64));
  for (std::size_t k = 0; k < t.updates; ++k)
    CHECK(t.marked_probability[k + 1] == doctest::Approx(doubling_step(t.marked_probability[k])).epsilon(1e-12));
  CHECK(t.marked_probability.back() >= 0.5);
  CHECK(t.updates <= 7);
  CHECK(t.herald_probability.size() == t.updates);
  CHECK(t.herald_bits.size() == t.updates);
}
}
