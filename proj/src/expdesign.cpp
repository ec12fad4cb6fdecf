#include "qbayes/expdesign.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qbayes/errors.hpp"
#include "qbayes/kernels.hpp"

namespace qbayes {

namespace {

// Exact sums the simulator needs to know the true branch probabilities; they
// run on a private copy so the caller's counters only see charged oracle calls.
struct Shadow {
  double evidence = 0.0;
  double numerator = 0.0;
};

Shadow shadow_terms(const DiscreteDistribution& prior, const LikelihoodModel& model, std::size_t d) {
  const LikelihoodModel copy = model;
  const auto row = copy.row(d);
  std::vector<double> joint(prior.size());
  Shadow s;
  s.evidence = kernels::par::reweight(prior.weights(), row, joint);
  const auto raw = kernels::par::raw_moments(joint, prior.grid().view());
  for (double f : raw.first) s.numerator += f * f;
  return s;
}

double double_term_exact(const DiscreteDistribution& prior, const LikelihoodModel& model) {
  const LikelihoodModel copy = model;
  const auto& grid = prior.grid();
  double total = 0.0;
  std::vector<double> joint(prior.size());
  for (std::size_t d = 0; d < copy.outcomes(); ++d) {
    const auto row = copy.row(d);
    kernels::par::reweight(prior.weights(), row, joint);
    const auto raw = kernels::par::raw_moments(joint, grid.view());
    for (int i = 0; i < grid.dims(); ++i) total += raw.second[static_cast<std::size_t>(i * grid.dims() + i)];
  }
  return total;
}

}  // namespace

TermEstimate estimate_evidence_prob(const DiscreteDistribution& prior, const LikelihoodModel& model, std::size_t d,
                                    double tolerance, const ProbabilityEstimator& estimator, Rng& rng,
                                    std::optional<double> floor) {
  if (!(prior.grid() == model.grid())) throw std::invalid_argument("estimate_evidence_prob: grid mismatch");
  if (!(tolerance > 0.0)) throw std::invalid_argument("estimate_evidence_prob: tolerance must be positive");
  const double gamma = model.gamma(d);
  const double p = shadow_terms(prior, model, d).evidence;
  const double f = floor ? *floor : p;
  if (tolerance > f / 2.0)
    throw FloorViolation("estimate_evidence_prob: tolerance exceeds P(d)/2 for outcome " + std::to_string(d), d);
  const EstimationOutcome e = estimator.estimate(p / gamma, tolerance / gamma, rng);
  model.charge_oracle(e.unitary_calls);
  return {gamma * e.estimate, e.unitary_calls, false};
}

TermEstimate estimate_integral_term(const DiscreteDistribution& prior, const LikelihoodModel& model, IntegralTerm term,
                                    std::size_t d, double tolerance, double p_tilde, double p_tolerance,
                                    const ProbabilityEstimator& estimator, Rng& rng) {
  if (!(prior.grid() == model.grid())) throw std::invalid_argument("estimate_integral_term: grid mismatch");
  if (!(tolerance > 0.0)) throw std::invalid_argument("estimate_integral_term: tolerance must be positive");
  const double dims = prior.grid().dims();

  if (term == IntegralTerm::double_term) {
    const double outcomes = static_cast<double>(model.outcomes());
    const double scale = outcomes * dims;
    const double a = double_term_exact(prior, model) / scale;
    const EstimationOutcome e = estimator.estimate(a, tolerance / scale, rng);
    model.charge_oracle(e.unitary_calls);
    return {scale * e.estimate, e.unitary_calls, false};
  }

  const double gamma = model.gamma(d);
  const double scale = dims * gamma * gamma;
  const double a = shadow_terms(prior, model, d).numerator / scale;
  const double cap = (p_tilde + p_tolerance) / gamma;
  const double a0 = cap * cap / dims;
  const double tol = tolerance / scale;

  EstimationOutcome e;
  bool fallback = true;
  if (a0 < 1.0 && a <= a0 && estimator.kind == EstimatorKind::amplitude) {
    e = prior_amplified_estimate(branch_from_probability(a), a0, tol, rng, estimator.repetitions);
    fallback = false;
  } else if (estimator.kind != EstimatorKind::amplitude) {
    e = estimator.estimate(a, tol, rng);
    fallback = false;
  } else {
    e = estimator.estimate(a, tol, rng, std::min(a0, 0.5));
  }
  // Two copies of the prior, one oracle call each.
  model.charge_oracle(2 * e.unitary_calls);
  return {scale * e.estimate, 2 * e.unitary_calls, fallback};
}

UtilityEstimate utility_quantum(const DiscreteDistribution& prior, const LikelihoodModel& model, double epsilon0,
                                Rng& rng, const ProbabilityEstimator& estimator, std::optional<double> floor) {
  if (!(epsilon0 > 0.0)) throw std::invalid_argument("utility_quantum: epsilon0 must be positive");
  if (floor && epsilon0 > *floor / 2.0) throw FloorViolation("utility_quantum: epsilon0 exceeds floor/2", 0);
  const std::size_t outcomes = model.outcomes();
  const double r = epsilon0 / (4.0 * static_cast<double>(outcomes));
  const double p_tol = r / 4.0;

  UtilityEstimate out;
  out.epsilon0 = epsilon0;
  {
    Rng local = rng.split({stream_id::kUtility, 0});
    const TermEstimate t1 =
        estimate_integral_term(prior, model, IntegralTerm::double_term, 0, epsilon0 / 4.0, 0.0, 0.0, estimator, local);
    out.term1 = t1.value;
    out.oracle_queries += t1.oracle_queries;
  }
  for (std::size_t d = 0; d < outcomes; ++d) {
    Rng lp = rng.split({stream_id::kUtility, 1, d});
    const TermEstimate p = estimate_evidence_prob(prior, model, d, p_tol, estimator, lp, std::nullopt);
    out.oracle_queries += p.oracle_queries;
    if (p.value < 2.0 * epsilon0)
      throw FloorViolation("utility_quantum: estimated P(d) < 2 epsilon0 for outcome " + std::to_string(d), d);
    out.evidence.push_back(p.value);

    const double n_tol = r * std::max(p.value - p_tol, 0.0) / 4.0;
    Rng lc = rng.split({stream_id::kUtility, 2, d});
    const TermEstimate nc =
        estimate_integral_term(prior, model, IntegralTerm::cross, d, n_tol, p.value, p_tol, estimator, lc);
    Rng lq = rng.split({stream_id::kUtility, 3, d});
    const TermEstimate nq =
        estimate_integral_term(prior, model, IntegralTerm::quad, d, n_tol, p.value, p_tol, estimator, lq);
    out.oracle_queries += nc.oracle_queries + nq.oracle_queries;
    out.plain_fallback = out.plain_fallback || nc.plain_fallback || nq.plain_fallback;
    out.cross.push_back(nc.value);
    out.quad.push_back(nq.value);
    out.term2 += nc.value / p.value;
    out.term3 += nq.value / p.value;
  }
  out.value = -out.term1 + 2.0 * out.term2 - out.term3;
  return out;
}

double gradient_budget(double epsilon, double m3) {
  if (!(epsilon > 0.0) || !(m3 > 0.0)) throw std::invalid_argument("gradient_budget: epsilon and M3 must be positive");
  return std::pow(epsilon, 1.5) / std::sqrt(m3);
}

double gradient_step(double epsilon0, double m3) { return std::cbrt(epsilon0 / m3); }

GradientEstimate gradient_quantum(const DiscreteDistribution& prior, const ControlledModel& family,
                                  const ExperimentControl& control, double epsilon, double m3, Rng& rng,
                                  const ProbabilityEstimator& estimator) {
  GradientEstimate out;
  out.epsilon0 = gradient_budget(epsilon, m3);
  out.step = gradient_step(out.epsilon0, m3);
  out.value = Eigen::VectorXd(control.size());
  for (Eigen::Index j = 0; j < control.size(); ++j) {
    const auto jj = static_cast<std::uint64_t>(j);
    Rng up_rng = rng.split({stream_id::kGradient, jj, 0});
    Rng down_rng = rng.split({stream_id::kGradient, jj, 1});
    const UtilityEstimate up =
        utility_quantum(prior, family(control.shifted(j, out.step)), out.epsilon0, up_rng, estimator);
    const UtilityEstimate down =
        utility_quantum(prior, family(control.shifted(j, -out.step)), out.epsilon0, down_rng, estimator);
    out.value[j] = (up.value - down.value) / (2.0 * out.step);
    out.oracle_queries += up.oracle_queries + down.oracle_queries;
  }
  return out;
}

double estimate_m3(const DiscreteDistribution& prior, const ControlledModel& family, const ExperimentControl& lo,
                   const ExperimentControl& hi, int samples, double h) {
  if (samples < 1 || !(h > 0.0)) throw std::invalid_argument("estimate_m3: need samples >= 1 and h > 0");
  double best = 0.0;
  for (Eigen::Index j = 0; j < lo.size(); ++j) {
    const double a = lo[j] + 2.0 * h;
    const double b = hi[j] - 2.0 * h;
    for (int s = 0; s < samples; ++s) {
      const double frac = samples == 1 ? 0.5 : static_cast<double>(s) / (samples - 1);
      ExperimentControl c = lo;
      for (Eigen::Index k = 0; k < lo.size(); ++k) c.components[k] = 0.5 * (lo[k] + hi[k]);
      c.components[j] = a + (b - a) * frac;
      auto u = [&](double off) { return utility_exact(prior, family, c.shifted(j, off)).value; };
      const double third = (u(2 * h) - 2 * u(h) + 2 * u(-h) - u(-2 * h)) / (2 * h * h * h);
      best = std::max(best, std::abs(third));
    }
  }
  return 2.0 * best;
}

AscentResult design_ascent(const DiscreteDistribution& prior, const ControlledModel& family,
                           const ExperimentControl& c0, int steps, double rate, double epsilon, double m3, Rng& rng,
                           const ExperimentControl& lo, const ExperimentControl& hi,
                           const ProbabilityEstimator& estimator) {
  if (steps < 1 || !(rate > 0.0)) throw std::invalid_argument("design_ascent: need steps >= 1 and rate > 0");
  AscentResult out;
  ExperimentControl c = c0;
  out.controls.push_back(c);
  out.risk.push_back(utility_exact(prior, family, c).risk());
  for (int s = 0; s < steps; ++s) {
    Rng local = rng.split({static_cast<std::uint64_t>(s)});
    const GradientEstimate g = gradient_quantum(prior, family, c, epsilon, m3, local, estimator);
    out.oracle_queries += g.oracle_queries;
    Eigen::VectorXd next = c.components + rate * g.value;
    next = next.cwiseMax(lo.components).cwiseMin(hi.components);
    c = ExperimentControl(next);
    out.controls.push_back(c);
    out.risk.push_back(utility_exact(prior, family, c).risk());
  }
  out.control = c;
  return out;
}

}  // namespace qbayes
