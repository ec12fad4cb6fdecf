#include "qbayes/exact_bayes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "qbayes/errors.hpp"
#include "qbayes/kernels.hpp"

namespace qbayes {

DiscreteDistribution bayes_update_row(const DiscreteDistribution& prior, std::span<const double> row) {
  if (row.size() != prior.size()) throw std::invalid_argument("bayes_update: likelihood row length mismatch");
  std::vector<double> post(prior.size());
  const double z = kernels::par::reweight(prior.weights(), row, post);
  if (!(z > 0.0)) throw ImpossibleEvidence("bayes_update: evidence has zero probability under the prior");
  kernels::par::scale(post, 1.0 / z);
  return DiscreteDistribution::normalized(prior.grid(), std::move(post));
}

DiscreteDistribution bayes_update(const DiscreteDistribution& prior, const LikelihoodModel& model,
                                  std::size_t outcome) {
  if (!(prior.grid() == model.grid())) throw std::invalid_argument("bayes_update: grid mismatch");
  const auto row = model.row(outcome);
  return bayes_update_row(prior, row);
}

DiscreteDistribution sequential_update(const DiscreteDistribution& prior, const LikelihoodModel& model,
                                       std::span<const std::size_t> evidence) {
  DiscreteDistribution current = prior;
  for (std::size_t e : evidence) current = bayes_update(current, model, e);
  return current;
}

double evidence_prob(const DiscreteDistribution& prior, const LikelihoodModel& model, std::size_t outcome) {
  if (!(prior.grid() == model.grid())) throw std::invalid_argument("evidence_prob: grid mismatch");
  const auto row = model.row(outcome);
  return kernels::par::dot(prior.weights(), row);
}

UtilityReport utility_exact(const DiscreteDistribution& prior, const LikelihoodModel& model) {
  if (!(prior.grid() == model.grid())) throw std::invalid_argument("utility_exact: grid mismatch");
  const auto& grid = prior.grid();
  const int dims = grid.dims();
  const std::size_t n = grid.size();
  const auto w = prior.weights();

  UtilityReport rep;
  rep.evidence.assign(model.outcomes(), 0.0);
  rep.numerator.assign(model.outcomes(), 0.0);
  std::vector<double> joint(n);
  for (std::size_t d = 0; d < model.outcomes(); ++d) {
    const auto row = model.row(d);
    const double pd = kernels::par::reweight(w, row, joint);
    rep.evidence[d] = pd;
    const auto raw = kernels::par::raw_moments(joint, grid.view());
    double sq = 0.0;
    double n_d = 0.0;
    for (int i = 0; i < dims; ++i) {
      sq += raw.second[i * dims + i];
      n_d += raw.first[i] * raw.first[i];
    }
    rep.term1 += sq;
    rep.numerator[d] = n_d;
    // Outcomes that cannot occur contribute nothing; skip rather than divide by zero.
    if (pd > 0.0) {
      rep.term2 += n_d / pd;
      rep.term3 += n_d / pd;
    }
  }
  rep.value = -rep.term1 + 2.0 * rep.term2 - rep.term3;
  return rep;
}

UtilityReport utility_exact(const DiscreteDistribution& prior, const ControlledModel& family,
                            const ExperimentControl& control) {
  return utility_exact(prior, family(control));
}

double default_gradient_step(double component) { return 1e-4 * std::max(1.0, std::abs(component)); }

Eigen::VectorXd gradient_exact(const DiscreteDistribution& prior, const ControlledModel& family,
                               const ExperimentControl& control, double h) {
  Eigen::VectorXd g(control.size());
  for (Eigen::Index j = 0; j < control.size(); ++j) {
    const double step = h > 0.0 ? h : default_gradient_step(control[j]);
    const double up = utility_exact(prior, family, control.shifted(j, step)).value;
    const double down = utility_exact(prior, family, control.shifted(j, -step)).value;
    g[j] = (up - down) / (2.0 * step);
  }
  return g;
}

}  // namespace qbayes
