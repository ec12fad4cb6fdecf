#include "qbayes/amp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qbayes/kernels.hpp"

namespace qbayes {

namespace {

constexpr double kPi = std::numbers::pi;

double fejer(double delta, double m) {
  const double s = std::sin(kPi * delta);
  if (std::abs(s) < 1e-15) return 1.0;
  const double num = std::sin(m * kPi * delta);
  return (num * num) / (m * m * s * s);
}

void check_reps(int r) {
  if (r < 1 || r % 2 == 0) throw std::invalid_argument("amplitude estimation: repetitions must be a positive odd number");
}

}  // namespace

BranchState to_branch(const QuantumState& state, const std::function<bool(std::size_t)>& marked,
                      std::string description) {
  const auto amps = state.amplitudes();
  BranchState b;
  b.marked = std::move(description);
  b.good.assign(amps.size(), cplx{0.0, 0.0});
  b.bad.assign(amps.size(), cplx{0.0, 0.0});
  double good = 0.0;
  double bad = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    if (marked(i)) {
      b.good[i] = amps[i];
      good += std::norm(amps[i]);
    } else {
      b.bad[i] = amps[i];
      bad += std::norm(amps[i]);
    }
  }
  b.a = std::clamp(good / (good + bad), 0.0, 1.0);
  b.theta = std::asin(std::sqrt(b.a));
  if (good > 0.0)
    for (auto& v : b.good) v /= std::sqrt(good);
  if (bad > 0.0)
    for (auto& v : b.bad) v /= std::sqrt(bad);
  b.degenerate = b.a < 1e-14 || b.a > 1.0 - 1e-14;
  return b;
}

BranchState branch_from_probability(double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("branch: probability outside [0,1]");
  BranchState b;
  b.a = a;
  b.theta = std::asin(std::sqrt(a));
  b.degenerate = a == 0.0 || a == 1.0;
  return b;
}

BranchState grover_power(const BranchState& branch, int m) {
  if (m < 0) throw std::invalid_argument("grover_power: m must be >= 0");
  BranchState out = branch;
  const double s = std::sin((2.0 * m + 1.0) * branch.theta);
  out.a = s * s;
  out.theta = std::asin(std::sqrt(out.a));
  out.degenerate = out.a < 1e-14 || out.a > 1.0 - 1e-14;
  return out;
}

std::vector<double> estimation_distribution(double theta, int t_bits) {
  if (t_bits < 1 || t_bits > 30) throw std::invalid_argument("amplitude estimation: t_bits must be in [1,30]");
  const std::size_t big_m = std::size_t{1} << t_bits;
  const double md = static_cast<double>(big_m);
  const double phi = theta / kPi;
  std::vector<double> p(big_m);
  double total = 0.0;
  for (std::size_t y = 0; y < big_m; ++y) {
    const double x = static_cast<double>(y) / md;
    p[y] = 0.5 * fejer(x - phi, md) + 0.5 * fejer(x + phi, md);
    total += p[y];
  }
  for (double& v : p) v /= total;
  return p;
}

EstimationOutcome amplitude_estimate(const BranchState& branch, int t_bits, int r, Rng& rng) {
  check_reps(r);
  auto cdf = estimation_distribution(branch.theta, t_bits);
  for (std::size_t y = 1; y < cdf.size(); ++y) cdf[y] += cdf[y - 1];
  const double md = static_cast<double>(cdf.size());
  std::vector<double> draws(static_cast<std::size_t>(r));
  for (auto& d : draws) {
    const double y = static_cast<double>(kernels::sample_cdf(cdf, rng.uniform()));
    const double s = std::sin(kPi * y / md);
    d = s * s;
  }
  std::nth_element(draws.begin(), draws.begin() + r / 2, draws.end());

  EstimationOutcome out;
  out.estimate = draws[static_cast<std::size_t>(r / 2)];
  out.repetitions = r;
  out.t_bits = t_bits;
  const auto grovers = static_cast<std::uint64_t>(cdf.size() - 1);
  out.grover_applications = static_cast<std::uint64_t>(r) * grovers;
  out.unitary_calls = static_cast<std::uint64_t>(r) * (2 * grovers + 1);
  return out;
}

double estimation_error_bound(double a, int t_bits) {
  const double md = std::ldexp(1.0, t_bits);
  return 2.0 * kPi * std::sqrt(a * (1.0 - a)) / md + kPi * kPi / (md * md);
}

int bits_for_error(double tolerance, double a_upper) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("bits_for_error: tolerance must be positive");
  const double a = std::clamp(a_upper, 0.0, 0.5);
  for (int t = 1; t <= 30; ++t)
    if (estimation_error_bound(a, t) <= tolerance) return t;
  throw std::invalid_argument("bits_for_error: tolerance needs more than 30 estimation bits");
}

int amplification_rounds(double a0) {
  if (!(a0 > 0.0 && a0 < 1.0)) throw std::invalid_argument("amplification_rounds: a0 must lie in (0,1)");
  const double theta0 = std::asin(std::sqrt(a0));
  return std::max(0, static_cast<int>(std::floor((kPi / (2.0 * theta0) - 1.0) / 2.0 + 1e-9)));
}

double invert_amplified(double y, int m) {
  const double s = std::sin(std::asin(std::sqrt(std::clamp(y, 0.0, 1.0))) / (2.0 * m + 1.0));
  return s * s;
}

EstimationOutcome prior_amplified_estimate(const BranchState& branch, double a0, double epsilon, Rng& rng, int r) {
  if (!(a0 > 0.0 && a0 < 1.0)) throw std::invalid_argument("prior_amplified_estimate: a0 must lie in (0,1)");
  if (branch.a > a0 * (1.0 + 1e-12))
    throw std::invalid_argument("prior_amplified_estimate: a exceeds the prior bound a0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("prior_amplified_estimate: epsilon must be positive");
  check_reps(r);

  const int m = amplification_rounds(a0);
  const double k = 2.0 * m + 1.0;
  const double theta0 = std::asin(std::sqrt(a0));
  const double slope = theta0 <= kPi / 4.0 ? std::sin(2.0 * theta0) : 1.0;
  int t = 1;
  for (;; ++t) {
    if (t > 30) throw std::invalid_argument("prior_amplified_estimate: epsilon needs more than 30 estimation bits");
    const double dtheta = kPi / (std::ldexp(1.0, t) * k);
    if (slope * dtheta + dtheta * dtheta <= epsilon) break;
  }

  EstimationOutcome out = amplitude_estimate(grover_power(branch, m), t, r, rng);
  out.estimate = invert_amplified(out.estimate, m);
  out.m = m;
  const auto grovers = (std::uint64_t{1} << t) - 1;
  const auto per = static_cast<std::uint64_t>(k);
  out.grover_applications = static_cast<std::uint64_t>(r) * grovers * per;
  out.unitary_calls = static_cast<std::uint64_t>(r) * (2 * grovers * per + 1);
  return out;
}

AmplificationRun amplify_until_success(const BranchState& branch, Rng& rng) {
  if (!(branch.a > 0.0)) throw std::invalid_argument("amplify_until_success: the marked branch has zero probability");
  const int m = branch.theta > 0.0 ? std::max(0, static_cast<int>(std::floor(kPi / (4.0 * branch.theta) - 0.5 + 1e-9))) : 0;
  const double boosted = grover_power(branch, m).a;
  AmplificationRun run;
  for (;;) {
    ++run.attempts;
    run.grover_count += static_cast<std::uint64_t>(m);
    if (rng.uniform() < boosted) return run;
  }
}

AmplifiedState amplify_until_success(const QuantumState& state, const std::function<bool(std::size_t)>& marked,
                                     const LikelihoodModel& model, Rng& rng) {
  const BranchState branch = to_branch(state, marked);
  const AmplificationRun run = amplify_until_success(branch, rng);
  const auto heralds = state.registers_of_kind(RegisterKind::herald);
  const int m = static_cast<int>(run.grover_count / run.attempts);
  model.charge_oracle(run.attempts * (2 * static_cast<std::uint64_t>(m) + 1) * heralds.size());
  return {state.condition(marked, heralds), run.grover_count, run.attempts};
}

EstimationOutcome ProbabilityEstimator::estimate(double a, double tolerance, Rng& rng, double a_upper) const {
  a = std::clamp(a, 0.0, 1.0);
  switch (kind) {
    case EstimatorKind::exact: {
      EstimationOutcome out;
      out.estimate = a;
      return out;
    }
    case EstimatorKind::perturbed: {
      EstimationOutcome out;
      out.estimate = std::clamp(a + tolerance * (2.0 * rng.uniform() - 1.0), 0.0, 1.0);
      return out;
    }
    case EstimatorKind::amplitude:
      break;
  }
  return amplitude_estimate(branch_from_probability(a), bits_for_error(tolerance, a_upper), repetitions, rng);
}

}  // namespace qbayes
