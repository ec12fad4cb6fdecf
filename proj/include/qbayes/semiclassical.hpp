#pragma once

// Semi-classical updates: batched coherent updates, moment extraction by
// probability estimation, and a Gaussian model cached between batches.

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "qbayes/amp.hpp"
#include "qbayes/grid.hpp"
#include "qbayes/likelihood.hpp"
#include "qbayes/qsim.hpp"
#include "qbayes/rng.hpp"

namespace qbayes {

struct PosteriorSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double epsilon = 0.0;
  std::uint64_t queries = 0;
  std::vector<std::size_t> batch;
  /// Set when a negative variance estimate was clipped to zero.
  bool clipped = false;
};

/// Lambda_x = x_i (one index) or x_i x_j (two indices).
struct MomentSpec {
  std::vector<int> index;
  double lambda0 = 0.0;
  double delta_lambda = 1.0;

  double lambda(const HypothesisGrid& grid, std::size_t j) const;
};

/// lambda0 = the moment under `center`, delta_lambda = max over the grid of |lambda_x - lambda0|.
MomentSpec make_moment_spec(const DiscreteDistribution& center, std::vector<int> index);

/// Appends a comparison qubit "cmp" with amplitudes sqrt((1 +- (lambda_x - lambda0)/delta_lambda)/2).
QuantumState attach_moment_ancilla(const QuantumState& state, const MomentSpec& spec);

struct MomentEstimate {
  double value = 0.0;
  double p1 = 0.0;
  double p11 = 0.0;
  std::uint64_t oracle_queries = 0;
  std::uint64_t grover_applications = 0;
};

/// <Lambda> of the herald-success posterior from estimates of P(1) (all heralds 1)
/// and P(11) (heralds 1 and comparison 1): (2 P11/P1 - 1) delta_lambda + lambda0.
/// Each use of the batch unitary costs one oracle call per herald; when
/// `charge_to` is given those calls are charged to it as they happen.
/// Throws BatchTooImprobable when P(1) cannot be resolved from zero.
MomentEstimate estimate_moment(const QuantumState& batched, const MomentSpec& spec, double epsilon,
                               const ProbabilityEstimator& estimator, Rng& rng,
                               const LikelihoodModel* charge_to = nullptr);

/// One semi-classical update; every moment is estimated to epsilon/4 so the
/// assembled covariance stays within epsilon.
PosteriorSummary semiclassical_update(const DiscreteDistribution& prior, const LikelihoodModel& model,
                                      std::span<const std::size_t> evidence, double epsilon, Rng& rng,
                                      const ProbabilityEstimator& estimator = {});

/// Gaussian on the grid with the summary's moments; degenerate covariance gives a point mass.
DiscreteDistribution refit_gaussian(const PosteriorSummary& summary, const HypothesisGrid& grid);

/// Exact mean and covariance, packaged as a summary (no estimation).
PosteriorSummary exact_summary(const DiscreteDistribution& dist);

struct Observation {
  ExperimentControl control;
  std::size_t outcome = 0;
};

/// A model whose outcome k is observation k of `batch` (its own control and outcome).
LikelihoodModel batch_model(const ControlledModel& family, std::span<const Observation> batch);

struct OnlineStep {
  PosteriorSummary summary;
  std::size_t first = 0;  // index of the batch's first observation in the stream
  std::size_t size = 0;
  bool retried = false;
  bool split = false;                 // processed one observation at a time
  std::vector<std::size_t> skipped;   // stream indices dropped after failing alone
};

/// Consumes the stream in batches of L. After each batch the summary is
/// cached and its Gaussian refit becomes the next prior. A batch that is too
/// improbable is retried once from the cached model with a fresh random
/// stream, then processed one observation at a time; an observation that
/// still fails on its own is skipped and recorded.
std::vector<OnlineStep> online_inference(const DiscreteDistribution& prior, const ControlledModel& family,
                                         std::span<const Observation> stream, std::size_t L, double epsilon,
                                         Rng& rng, const ProbabilityEstimator& estimator = {});

struct BaselineEstimate {
  double value = 0.0;
  std::uint64_t queries = 0;
  std::uint64_t accepted = 0;
};

/// Classical rejection sampling: draw x from the prior, accept with
/// prod_k P(E_k|x)/Gamma_k (one query per factor), until ceil((delta_lambda/epsilon)^2)
/// samples are accepted; returns their mean of Lambda.
BaselineEstimate classical_moment_baseline(const DiscreteDistribution& prior, const LikelihoodModel& model,
                                           std::span<const std::size_t> evidence, const MomentSpec& spec,
                                           double epsilon, Rng& rng);

}  // namespace qbayes
