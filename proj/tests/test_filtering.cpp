#include <doctest.h>

#include <cmath>

#include "qbayes/filtering.hpp"
#include "qbayes/grid.hpp"

using namespace qbayes;

namespace {
DiscreteDistribution bump(const HypothesisGrid& g, double mu, double sd) {
  Eigen::VectorXd m(1);
  m << mu;
  Eigen::MatrixXd s(1, 1);
  s << sd * sd;
  return discretize_gaussian(g, m, s);
}
}  // namespace

TEST_SUITE("filtering") {
TEST_CASE("likelihood forms") {
  const auto [p1, p0] = precession_likelihood(0.7, 0.2, 2.0);
  CHECK(p1 == doctest::Approx(std::cos(1.0) * std::cos(1.0)));
  CHECK(p1 + p0 == doctest::Approx(1.0));
  CHECK(hyperparam_likelihood(0.0, 0.0, 0.3, 2.0) == doctest::Approx(1.0));
  CHECK(hyperparam_likelihood(0.6, 0.0, 0.0, 2.0) == doctest::Approx((std::cos(1.2) + 1) / 2));
  CHECK(hyperparam_likelihood(0.6, 0.1, 0.0, 2.0) ==
        doctest::Approx((std::exp(-0.02) * std::cos(1.2) + 1) / 2));
}

TEST_CASE("kernels") {
  const auto d = delta_kernel(8);
  for (double v : d.q_hat) CHECK(v == doctest::Approx(1.0));
  CHECK_THROWS_AS(make_kernel({0.5, 0.5, 0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(make_kernel({0.5, 0.5, 0.0}), std::invalid_argument);
  const auto w = wrapped_gaussian_kernel(64, 0.05);
  double sum = 0.0;
  for (double v : w.q) sum += v;
  CHECK(sum == doctest::Approx(1.0));
  CHECK(w.q_hat[0] == doctest::Approx(1.0));
  CHECK(w.q[1] == doctest::Approx(w.q[63]));
}

TEST_CASE("circular moments") {
  const HypothesisGrid g(1, 3);
  std::vector<double> p(8, 0.0);
  p[0] = 0.5;
  p[7] = 0.5;
  const auto [mean, var] = circular_moments(DiscreteDistribution(g, p));
  CHECK(std::min(mean, 1.0 - mean) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(var == doctest::Approx(0.0625 * 0.0625));
}

TEST_CASE("delta kernel is the identity") {
  const HypothesisGrid g(1, 5);
  const auto p = bump(g, 0.4, 0.08);
  const auto c = classical_convolve(p, delta_kernel(32));
  for (std::size_t j = 0; j < 32; ++j) CHECK(c[j] == doctest::Approx(p[j]));
  const auto q = filter_success_branch(prepare_state(p), delta_kernel(32));
  CHECK(q.success_probability == doctest::Approx(1.0));
  const auto post = q.post.hypothesis_marginal();
  for (std::size_t j = 0; j < 32; ++j) CHECK(post[j] == doctest::Approx(p[j]).epsilon(1e-10));
}

TEST_CASE("variance gain in each domain") {
  const HypothesisGrid g(1, 8);
  const auto p = bump(g, 0.5, 0.02);
  const double sq = 0.02;
  const auto k = wrapped_gaussian_kernel(256, sq);
  const double v0 = circular_moments(p).second;
  const double vc = circular_moments(classical_convolve(p, k)).second;
  const auto q = filter_success_branch(prepare_state(p), k);
  const double vq = circular_moments(q.post.hypothesis_marginal()).second;
  CHECK((vc - v0) == doctest::Approx(sq * sq).epsilon(0.05));
  CHECK((vq - v0) == doctest::Approx(sq * sq / 4).epsilon(0.05));
  CHECK(q.success_probability > 0.0);
  CHECK(q.success_probability <= 1.0);
}

TEST_CASE("repeat until success is seeded") {
  const HypothesisGrid g(1, 5);
  const auto s = prepare_state(bump(g, 0.5, 0.05));
  const auto k = wrapped_gaussian_kernel(32, 0.05);
  Rng a(9), b(9);
  std::uint64_t na = 0, nb = 0;
  const auto pa = quantum_convolve_until_success(s, k, a, &na).hypothesis_marginal();
  const auto pb = quantum_convolve_until_success(s, k, b, &nb).hypothesis_marginal();
  CHECK(na == nb);
  CHECK(na >= 1);
  for (std::size_t j = 0; j < 32; ++j) CHECK(pa[j] == pb[j]);
}

TEST_CASE("tracking reaches its predicted steady state") {
  TrackingConfig c;
  c.steps = 200;
  c.burn_in = 60;
  Rng r(11);
  const auto t = run_tracking(c, r);
  CHECK(t.truth.size() == 200);
  CHECK(t.alpha > 0.0);
  CHECK(t.alpha < 1.0);
  CHECK(t.steady / t.predicted == doctest::Approx(1.0).epsilon(0.05));
}
}
