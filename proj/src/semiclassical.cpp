#include "qbayes/semiclassical.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "qbayes/errors.hpp"
#include "qbayes/kernels.hpp"

namespace qbayes {

double MomentSpec::lambda(const HypothesisGrid& grid, std::size_t j) const {
  double v = 1.0;
  for (int i : index) v *= grid.coord(j, i);
  return v;
}

MomentSpec make_moment_spec(const DiscreteDistribution& center, std::vector<int> index) {
  const auto& grid = center.grid();
  if (index.empty() || index.size() > 2) throw std::invalid_argument("moment spec: one or two coordinate indices");
  for (int i : index)
    if (i < 0 || i >= grid.dims()) throw std::invalid_argument("moment spec: coordinate index out of range");
  MomentSpec spec;
  spec.index = std::move(index);
  double mean = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) mean += center[j] * spec.lambda(grid, j);
  spec.lambda0 = mean;
  double width = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) width = std::max(width, std::abs(spec.lambda(grid, j) - mean));
  spec.delta_lambda = width > 0.0 ? width : 1.0;
  return spec;
}

QuantumState attach_moment_ancilla(const QuantumState& state, const MomentSpec& spec) {
  if (!(spec.delta_lambda > 0.0)) throw std::invalid_argument("attach_moment_ancilla: delta_lambda must be positive");
  const auto& grid = state.grid();
  const std::size_t n = grid.size();
  std::vector<double> up(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double z = (spec.lambda(grid, j) - spec.lambda0) / spec.delta_lambda;
    if (std::abs(z) > 1.0 + 1e-12)
      throw std::invalid_argument("attach_moment_ancilla: |lambda_x - lambda0| > delta_lambda at grid index " +
                                  std::to_string(j));
    up[j] = std::clamp(0.5 * (1.0 + z), 0.0, 1.0);
  }
  return state.append_register(Register{"cmp", 2, RegisterKind::comparison}, [&](std::size_t flat, std::span<cplx> b) {
    const double p = up[flat % n];
    b[0] = std::sqrt(1.0 - p);
    b[1] = std::sqrt(p);
  });
}

MomentEstimate estimate_moment(const QuantumState& batched, const MomentSpec& spec, double epsilon,
                               const ProbabilityEstimator& estimator, Rng& rng, const LikelihoodModel* charge_to) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("estimate_moment: epsilon must be positive");
  const std::uint64_t updates = batched.registers_of_kind(RegisterKind::herald).size();
  const QuantumState with = attach_moment_ancilla(batched, spec);
  const auto success = all_heralds_one(with);
  const std::size_t cmp = with.register_index("cmp");
  const double p1 = with.probability(success);
  const double p11 = with.probability([&](std::size_t i) { return success(i) && with.value(i, cmp) == 1; });

  MomentEstimate out;
  auto tally = [&](const EstimationOutcome& e) {
    out.oracle_queries += e.unitary_calls * updates;
    out.grover_applications += e.grover_applications;
    if (charge_to) charge_to->charge_oracle(e.unitary_calls * updates);
    return e.estimate;
  };

  double scale = p1;  // lower bound on P(1) used to size delta
  double a_upper = 0.5;
  if (estimator.kind == EstimatorKind::amplitude) {
    // Coarse stage: grow the register until P(1) is resolved from zero.
    bool resolved = false;
    for (int t = 1; t <= 20 && !resolved; ++t) {
      const double bound = estimation_error_bound(0.5, t);
      const double coarse = tally(amplitude_estimate(branch_from_probability(p1), t, estimator.repetitions, rng));
      if (coarse > 4.0 * bound) {
        resolved = true;
        scale = coarse - bound;
        a_upper = std::min(1.0, coarse + bound);
      }
    }
    if (!resolved) throw BatchTooImprobable("estimate_moment: herald success probability not resolved from zero");
  } else if (!(p1 > 0.0)) {
    throw BatchTooImprobable("estimate_moment: herald success probability is zero");
  }

  const double delta = epsilon * scale / (5.0 * spec.delta_lambda);
  out.p1 = tally(estimator.estimate(p1, delta, rng, a_upper));
  if (out.p1 < 2.0 * delta) throw BatchTooImprobable("estimate_moment: estimated P(1) below 2 delta");
  out.p11 = tally(estimator.estimate(p11, delta, rng, a_upper));
  const double ratio = std::clamp(out.p11 / out.p1, 0.0, 1.0);
  out.value = (2.0 * ratio - 1.0) * spec.delta_lambda + spec.lambda0;
  return out;
}

PosteriorSummary exact_summary(const DiscreteDistribution& dist) {
  const Moments m = moments(dist);
  PosteriorSummary s;
  s.mean = m.mean;
  s.cov = m.cov;
  return s;
}

PosteriorSummary semiclassical_update(const DiscreteDistribution& prior, const LikelihoodModel& model,
                                      std::span<const std::size_t> evidence, double epsilon, Rng& rng,
                                      const ProbabilityEstimator& estimator) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("semiclassical_update: epsilon must be positive");
  PosteriorSummary out;
  out.epsilon = epsilon;
  out.batch.assign(evidence.begin(), evidence.end());
  if (evidence.empty()) {
    const PosteriorSummary exact = exact_summary(prior);
    out.mean = exact.mean;
    out.cov = exact.cov;
    return out;
  }

  const std::uint64_t before = model.oracle_queries();
  const QuantumState batched = coherent_update(prepare_state(prior), model, evidence);
  const int d = prior.grid().dims();

  struct Job {
    std::vector<int> index;
    double value = 0.0;
  };
  std::vector<Job> jobs;
  for (int i = 0; i < d; ++i) jobs.push_back({{i}});
  for (int i = 0; i < d; ++i)
    for (int k = i; k < d; ++k) jobs.push_back({{i, k}});

  for (std::size_t k = 0; k < jobs.size(); ++k) {
    Rng local = rng.split({stream_id::kMoment, k});
    const MomentSpec spec = make_moment_spec(prior, jobs[k].index);
    jobs[k].value = estimate_moment(batched, spec, epsilon / 4.0, estimator, local, &model).value;
  }

  out.mean = Eigen::VectorXd(d);
  for (int i = 0; i < d; ++i) out.mean[i] = jobs[static_cast<std::size_t>(i)].value;
  out.cov = Eigen::MatrixXd(d, d);
  std::size_t pos = static_cast<std::size_t>(d);
  for (int i = 0; i < d; ++i)
    for (int k = i; k < d; ++k) {
      const double c = jobs[pos++].value - out.mean[i] * out.mean[k];
      out.cov(i, k) = c;
      out.cov(k, i) = c;
    }
  for (int i = 0; i < d; ++i)
    if (out.cov(i, i) < 0.0) {
      out.cov(i, i) = 0.0;
      out.clipped = true;
    }
  out.queries = model.oracle_queries() - before;
  return out;
}

DiscreteDistribution refit_gaussian(const PosteriorSummary& summary, const HypothesisGrid& grid) {
  const Eigen::MatrixXd sym = 0.5 * (summary.cov + summary.cov.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  const Eigen::VectorXd ev = es.eigenvalues();
  if (ev.maxCoeff() <= 1e-300) return DiscreteDistribution::point_mass(grid, grid.nearest(summary.mean));
  const Eigen::VectorXd clipped = ev.cwiseMax(1e-18);
  const Eigen::MatrixXd cov = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
  return discretize_gaussian(grid, summary.mean, 0.5 * (cov + cov.transpose()));
}

LikelihoodModel batch_model(const ControlledModel& family, std::span<const Observation> batch) {
  if (batch.empty()) throw std::invalid_argument("batch_model: empty batch");
  auto models = std::make_shared<std::vector<LikelihoodModel>>();
  std::vector<std::size_t> outcomes;
  std::vector<double> gamma;
  for (const auto& obs : batch) {
    models->push_back(family(obs.control));
    outcomes.push_back(obs.outcome);
    gamma.push_back(models->back().gamma(obs.outcome));
  }
  const HypothesisGrid grid = models->front().grid();
  auto eval = [models, outcomes](std::size_t k, std::size_t j) { return (*models)[k].query(outcomes[k], j); };
  return LikelihoodModel(grid, batch.size(), eval, std::move(gamma), std::nullopt, "batch");
}

std::vector<OnlineStep> online_inference(const DiscreteDistribution& prior, const ControlledModel& family,
                                         std::span<const Observation> stream, std::size_t L, double epsilon,
                                         Rng& rng, const ProbabilityEstimator& estimator) {
  if (L < 1) throw std::invalid_argument("online_inference: batch size must be >= 1");
  std::vector<OnlineStep> trace;
  DiscreteDistribution current = prior;
  for (std::size_t first = 0; first < stream.size(); first += L) {
    const auto batch = stream.subspan(first, std::min(L, stream.size() - first));
    OnlineStep step;
    step.first = first;
    step.size = batch.size();
    std::vector<std::size_t> evidence(batch.size());
    std::iota(evidence.begin(), evidence.end(), std::size_t{0});
    const LikelihoodModel model = batch_model(family, batch);

    bool done = false;
    for (std::uint64_t attempt = 0; attempt < 2 && !done; ++attempt) {
      try {
        Rng local = rng.split({first, attempt});
        step.summary = semiclassical_update(current, model, evidence, epsilon, local, estimator);
        done = true;
      } catch (const BatchTooImprobable&) {
        step.retried = true;
      }
    }
    std::uint64_t queries = model.oracle_queries();
    if (!done) {
      step.split = true;
      DiscreteDistribution local_prior = current;
      PosteriorSummary last = exact_summary(current);
      last.epsilon = epsilon;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const LikelihoodModel single = batch_model(family, batch.subspan(i, 1));
        const std::size_t zero = 0;
        try {
          Rng local = rng.split({first, 2, i});
          last = semiclassical_update(local_prior, single, {&zero, 1}, epsilon, local, estimator);
          local_prior = refit_gaussian(last, current.grid());
        } catch (const BatchTooImprobable&) {
          step.skipped.push_back(first + i);
        }
        queries += single.oracle_queries();
      }
      step.summary = last;
    }
    step.summary.queries = queries;
    step.summary.batch.clear();
    for (const auto& obs : batch) step.summary.batch.push_back(obs.outcome);
    current = refit_gaussian(step.summary, current.grid());
    trace.push_back(std::move(step));
  }
  return trace;
}

BaselineEstimate classical_moment_baseline(const DiscreteDistribution& prior, const LikelihoodModel& model,
                                           std::span<const std::size_t> evidence, const MomentSpec& spec,
                                           double epsilon, Rng& rng) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("classical_moment_baseline: epsilon must be positive");
  const auto& grid = prior.grid();
  std::vector<double> cdf(prior.weights().begin(), prior.weights().end());
  for (std::size_t j = 1; j < cdf.size(); ++j) cdf[j] += cdf[j - 1];
  const auto target = static_cast<std::uint64_t>(std::ceil(std::pow(spec.delta_lambda / epsilon, 2)));
  const std::uint64_t before = model.queries();
  const std::uint64_t limit = std::max<std::uint64_t>(target, 1) * 100000;

  BaselineEstimate out;
  double sum = 0.0;
  std::uint64_t attempts = 0;
  while (out.accepted < target) {
    if (++attempts > limit) throw BatchTooImprobable("classical_moment_baseline: acceptance rate too small");
    const std::size_t j = kernels::sample_cdf(cdf, rng.uniform());
    bool ok = true;
    for (std::size_t e : evidence) {
      if (rng.uniform() >= model.query(e, j) / model.gamma(e)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    ++out.accepted;
    sum += spec.lambda(grid, j);
  }
  out.value = target > 0 ? sum / static_cast<double>(out.accepted) : spec.lambda0;
  out.queries = model.queries() - before;
  return out;
}

}  // namespace qbayes
