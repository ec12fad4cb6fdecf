#include "qbayes/repcode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qbayes/kernels.hpp"

namespace qbayes {

namespace {

void check_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string("repcode: ") + what + " must be positive");
}

std::uint64_t ceil_copies(double value) {
  if (value <= 1.0) return 1;
  return static_cast<std::uint64_t>(std::ceil(value));
}

std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

std::vector<double> sum_distribution(const std::vector<double>& w, std::uint64_t k) {
  std::vector<double> acc = w;
  for (std::uint64_t c = 1; c < k; ++c) acc = convolve(acc, w);
  return acc;
}

bool within(double m, double mu, double delta_tol) { return std::abs(m - mu) <= delta_tol + 1e-12; }

}  // namespace

double LatticeDistribution::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) m += weights[i] * value(i);
  return m;
}

double LatticeDistribution::max_value() const {
  double top = value(0);
  for (std::size_t i = 0; i < weights.size(); ++i)
    if (weights[i] > 0.0) top = std::max(top, value(i));
  return top;
}

LatticeDistribution lattice_of(const DiscreteDistribution& dist) {
  if (dist.grid().dims() != 1) throw std::invalid_argument("lattice_of: one-dimensional grid required");
  const double dx = dist.grid().spacing();
  return {0.5 * dx, dx, std::vector<double>(dist.weights().begin(), dist.weights().end())};
}

std::uint64_t required_copies(double mu, double x_max, double delta_tol, double fail_prob) {
  check_positive(mu, "mu");
  check_positive(x_max, "x_max");
  check_positive(delta_tol, "delta_tol");
  if (!(fail_prob > 0.0 && fail_prob < 1.0)) throw std::invalid_argument("repcode: fail_prob must lie in (0,1)");
  return ceil_copies(3.0 * mu * x_max / (delta_tol * delta_tol) * std::log(1.0 / fail_prob));
}

std::uint64_t required_copies_sequential(double mu, double x_max, double delta_tol, std::uint64_t L, double eps) {
  check_positive(mu, "mu");
  check_positive(x_max, "x_max");
  check_positive(delta_tol, "delta_tol");
  check_positive(eps, "eps");
  if (L < 1) throw std::invalid_argument("repcode: L must be >= 1");
  const double l = static_cast<double>(L);
  return ceil_copies(3.0 * mu * x_max / (delta_tol * delta_tol) * std::log(l * l / eps));
}

double chernoff_tail(double mu, double x_max, double delta_tol, std::uint64_t K) {
  return std::exp(-delta_tol * delta_tol * static_cast<double>(K) / (3.0 * mu * x_max));
}

double MeanRegister::window_mass(double mu, double delta_tol) const {
  double total = 0.0;
  for (std::size_t s = 0; s < means.size(); ++s)
    if (within(means[s], mu, delta_tol)) total += mass[s];
  return total;
}

double MeanRegister::window_stderr(double mu, double delta_tol) const {
  if (exact) return 0.0;
  const double p = window_mass(mu, delta_tol);
  return std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(draws));
}

MeanRegister mean_register_distribution(const LatticeDistribution& dist, std::uint64_t K, double width,
                                        std::uint64_t key, std::uint64_t draws) {
  if (K < 1) throw std::invalid_argument("mean_register_distribution: K must be >= 1");
  check_positive(width, "width");
  if (dist.weights.empty()) throw std::invalid_argument("mean_register_distribution: empty distribution");
  MeanRegister reg;
  reg.copies = K;
  reg.width = width;
  if (K <= kExactCopiesLimit) {
    reg.mass = sum_distribution(dist.weights, K);
  } else {
    if (draws < 100000) throw std::invalid_argument("mean_register_distribution: Monte Carlo needs >= 1e5 draws");
    std::vector<double> cdf = dist.weights;
    for (std::size_t i = 1; i < cdf.size(); ++i) cdf[i] += cdf[i - 1];
    reg.mass.assign(K * (dist.weights.size() - 1) + 1, 0.0);
    kernels::par::sum_histogram(cdf, K, draws, key, reg.mass);
    reg.exact = false;
    reg.draws = draws;
  }
  const double kd = static_cast<double>(K);
  reg.means.resize(reg.mass.size());
  for (std::size_t s = 0; s < reg.mass.size(); ++s) reg.means[s] = dist.origin + dist.step * static_cast<double>(s) / kd;

  auto bin_of = [&](double m) { return static_cast<std::int64_t>(std::floor(m / width + 1e-9)); };
  reg.first_bin = bin_of(reg.means.front());
  reg.bins.assign(static_cast<std::size_t>(bin_of(reg.means.back()) - reg.first_bin + 1), 0.0);
  for (std::size_t s = 0; s < reg.mass.size(); ++s)
    reg.bins[static_cast<std::size_t>(bin_of(reg.means[s]) - reg.first_bin)] += reg.mass[s];
  return reg;
}

RepetitionPlan sequential_plan(double mu, double x_max, double delta_tol, std::uint64_t rounds, double eps) {
  RepetitionPlan plan;
  plan.copies = required_copies_sequential(mu, x_max, delta_tol, rounds, eps);
  plan.precision = delta_tol;
  plan.mu = mu;
  plan.x_max = x_max;
  plan.rounds = rounds;
  plan.eps = eps;
  return plan;
}

RoundsResult simulate_protected_rounds(const LatticeDistribution& dist, const RepetitionPlan& plan,
                                       const MeanRegister& reg, Rng& rng) {
  if (reg.copies != plan.copies) throw std::invalid_argument("simulate_protected_rounds: register built for other K");
  std::vector<double> cdf = dist.weights;
  for (std::size_t i = 1; i < cdf.size(); ++i) cdf[i] += cdf[i - 1];
  const double p_in = reg.window_mass(plan.mu, plan.precision);
  const double threshold = 1.0 - plan.round_failure();

  RoundsResult out;
  for (std::uint64_t round = 0; round < plan.rounds; ++round) {
    double s1 = 0.0, s2 = 0.0;
    for (std::uint64_t c = 0; c < plan.copies; ++c) {
      const double x = dist.value(kernels::sample_cdf(cdf, rng.uniform()));
      s1 += x;
      s2 += x * x;
    }
    const double m = s1 / static_cast<double>(plan.copies);
    const double m2 = s2 / static_cast<double>(plan.copies);
    const double overlap = within(m, plan.mu, plan.precision) ? p_in : 1.0 - p_in;
    out.overlap.push_back(overlap);
    out.mean.push_back(m);
    out.mean_square.push_back(m2);
    out.std_estimate.push_back(std::sqrt(std::max(m2 - m * m, 0.0)));
    if (overlap < threshold) ++out.failures;
  }
  return out;
}

double conditional_marginal_tv(const LatticeDistribution& dist, std::uint64_t K, double mu, double delta_tol) {
  if (K < 2 || K > kExactCopiesLimit) throw std::invalid_argument("conditional_marginal_tv: needs 2 <= K <= 64");
  const std::vector<double> rest = sum_distribution(dist.weights, K - 1);
  const double kd = static_cast<double>(K);
  std::vector<double> cond(dist.weights.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < dist.weights.size(); ++i) {
    if (dist.weights[i] == 0.0) continue;
    double hit = 0.0;
    for (std::size_t s = 0; s < rest.size(); ++s) {
      const double m = dist.origin + dist.step * static_cast<double>(i + s) / kd;
      if (within(m, mu, delta_tol)) hit += rest[s];
    }
    cond[i] = dist.weights[i] * hit;
    total += cond[i];
  }
  if (!(total > 0.0)) throw std::invalid_argument("conditional_marginal_tv: window has zero probability");
  double tv = 0.0;
  for (std::size_t i = 0; i < cond.size(); ++i) tv += std::abs(cond[i] / total - dist.weights[i]);
  return 0.5 * tv;
}

}  // namespace qbayes
