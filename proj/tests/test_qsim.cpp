#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qbayes/errors.hpp"
#include "qbayes/exact_bayes.hpp"
#include "qbayes/qsim.hpp"

using namespace qbayes;

TEST_SUITE("qsim") {
TEST_CASE("prepared amplitudes are square roots") {
  const HypothesisGrid g(1, 2);
  const DiscreteDistribution d(g, {0.1, 0.2, 0.3, 0.4});
  const auto s = prepare_state(d);
  for (std::size_t j = 0; j < 4; ++j) CHECK(s.amplitudes()[j].real() == doctest::Approx(std::sqrt(d[j])));
  CHECK(s.norm_squared() == doctest::Approx(1.0));
}

TEST_CASE("heralded update") {
  const HypothesisGrid g(1, 2);
  const DiscreteDistribution prior(g, {0.1, 0.2, 0.3, 0.4});
  const auto m = make_table_model(g, {{0.5, 0.4, 0.3, 0.2}, {0.5, 0.6, 0.7, 0.8}}, std::vector<double>{1.0, 0.9});
  const std::size_t ev[] = {1};
  const auto h = coherent_update(prepare_state(prior), m, ev);
  CHECK(m.oracle_queries() == 1);
  CHECK(m.queries() == 0);
  CHECK(h.layout().size() == 2);
  CHECK(herald_success_probability(h) == doctest::Approx(evidence_prob(prior, m, 1) / 0.9).epsilon(1e-14));
  const auto post = h.condition(all_heralds_one(h), h.registers_of_kind(RegisterKind::herald)).hypothesis_marginal();
  const auto exact = bayes_update(prior, m, 1);
  for (std::size_t j = 0; j < 4; ++j) CHECK(post[j] == doctest::Approx(exact[j]).epsilon(1e-14));
}

TEST_CASE("gamma violation names the offending point") {
  const HypothesisGrid g(1, 1);
  const auto m = make_table_model(g, {{0.2, 0.9}}, std::vector<double>{0.5});
  const std::size_t ev[] = {0};
  try {
    coherent_update(prepare_state(DiscreteDistribution::uniform(g)), m, ev);
    FAIL("expected GammaViolation");
  } catch (const GammaViolation& e) {
    CHECK(e.index() == 1);
  }
}

TEST_CASE("herald measurement is seeded") {
  const HypothesisGrid g(1, 3);
  const auto m = make_precession_model(g, 0.0, 2.0);
  const std::size_t ev[] = {1, 0};
  const auto h = coherent_update(prepare_state(DiscreteDistribution::uniform(g)), m, ev);
  Rng a(5), b(5);
  const auto ma = measure_herald(h, a), mb = measure_herald(h, b);
  CHECK(ma.bits == mb.bits);
  CHECK(ma.post.layout().size() == 1);
  CHECK(ma.post.norm_squared() == doctest::Approx(1.0));
}

TEST_CASE("qft") {
  const HypothesisGrid g(1, 3);
  const auto s = prepare_state(DiscreteDistribution::point_mass(g, 0));
  const auto f = qft(s);
  for (std::size_t k = 0; k < 8; ++k) CHECK(std::abs(f.amplitudes()[k]) == doctest::Approx(1 / std::sqrt(8.0)));
  const auto back = inverse_qft(f);
  CHECK(std::abs(back.amplitudes()[0] - cplx(1, 0)) < 1e-14);
}

TEST_CASE("impossible conditioning") {
  const HypothesisGrid g(1, 1);
  const auto s = prepare_state(DiscreteDistribution::point_mass(g, 0));
  const std::vector<std::size_t> none;
  CHECK_THROWS_AS(s.condition([](std::size_t j) { return j == 1; }, none), ImpossibleEvidence);
}

TEST_CASE("density states") {
  Eigen::MatrixXcd bad(2, 2);
  bad << 0.5, 0.3, 0.1, 0.5;
  CHECK_THROWS_AS(DensityState{bad}, std::invalid_argument);
  Eigen::MatrixXcd notrace = Eigen::MatrixXcd::Identity(2, 2);
  CHECK_THROWS_AS(DensityState{notrace}, std::invalid_argument);
  const cplx up[] = {1, 0}, down[] = {0, 1};
  CHECK(trace_distance(DensityState::pure(up), DensityState::pure(down)) == doctest::Approx(1.0));
  CHECK(coherence_factor(0.9, 0.1) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(coherence_factor(0.3, 0.3) == doctest::Approx(1.0));
}

TEST_CASE("traced-out update keeps the diagonal and contracts coherences") {
  const HypothesisGrid g(1, 1);
  const auto m = make_table_model(g, {{0.1, 0.9}, {0.9, 0.1}}, std::vector<double>{1, 1});
  const cplx amps[] = {std::cos(0.3), std::sin(0.3)};
  const auto rho = DensityState::pure(amps);
  const auto out = traceout_update_map(rho, m, 1);
  CHECK(std::abs(out.matrix()(0, 0) - rho.matrix()(0, 0)) < 1e-15);
  CHECK(std::abs(out.matrix()(0, 1)) == doctest::Approx(0.6 * std::abs(rho.matrix()(0, 1))));
}

TEST_CASE("perturbed basis state distance") {
  const std::vector<double> a = {0.0, 0.6, 0.8, 0.0};
  const auto rho = perturbed_basis_state(4, 0, 0.05, a);
  CHECK(rho.matrix().trace().real() == doctest::Approx(1.0));
  CHECK(rho.matrix()(0, 0).real() == doctest::Approx(1.0 / (1.0 + 0.0025)));
}
}
