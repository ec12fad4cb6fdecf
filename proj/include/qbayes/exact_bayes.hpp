#pragma once

// Exact classical Bayes: the ground truth every quantum estimate is checked against.

#include <span>
#include <vector>

#include "qbayes/grid.hpp"
#include "qbayes/likelihood.hpp"

namespace qbayes {

/// w'_j = w_j P(E|x_j) / sum_k w_k P(E|x_k). Throws ImpossibleEvidence when the denominator is zero.
DiscreteDistribution bayes_update(const DiscreteDistribution& prior, const LikelihoodModel& model, std::size_t outcome);

/// Same update against a precomputed likelihood row (no queries counted).
DiscreteDistribution bayes_update_row(const DiscreteDistribution& prior, std::span<const double> row);

/// Left fold of bayes_update over the evidence list.
DiscreteDistribution sequential_update(const DiscreteDistribution& prior, const LikelihoodModel& model,
                                       std::span<const std::size_t> evidence);

/// <P, P(E|.)> = sum_j w_j P(E|x_j).
double evidence_prob(const DiscreteDistribution& prior, const LikelihoodModel& model, std::size_t outcome);

/// Decomposition of the negative posterior-variance utility for one control:
///   U = -term1 + 2 term2 - term3
/// with term1 = sum_x sum_d P(x) P(d|x) |x|^2,
///      term2 = sum_d sum_{x,x'} P(x) P(d|x) P(x'|d) x.x',
///      term3 = sum_d sum_x P(x) P(d|x) sum_{x',x''} P(x'|d) P(x''|d) x'.x''.
struct UtilityReport {
  double value = 0.0;
  double term1 = 0.0;
  double term2 = 0.0;
  double term3 = 0.0;
  /// P(d) per outcome.
  std::vector<double> evidence;
  /// N(d|c) = |sum_x P(x) P(d|x) x|^2 per outcome (the cross-term numerator).
  std::vector<double> numerator;

  double risk() const { return -value; }
};

UtilityReport utility_exact(const DiscreteDistribution& prior, const LikelihoodModel& model);
UtilityReport utility_exact(const DiscreteDistribution& prior, const ControlledModel& family,
                            const ExperimentControl& control);

/// Default centered-difference step: 1e-4 * max(1, |c_j|).
double default_gradient_step(double component);

/// Centered differences (U(c + h e_j) - U(c - h e_j)) / (2h). A non-positive h
/// selects the per-component default step.
Eigen::VectorXd gradient_exact(const DiscreteDistribution& prior, const ControlledModel& family,
                               const ExperimentControl& control, double h = 0.0);

}  // namespace qbayes
