#pragma once

// Unstructured search phrased as Bayesian inference: an exact 0/1 likelihood
// update, and a noisy likelihood whose repeated pretended successes double
// the marked posterior each step.

#include <cstdint>
#include <vector>

#include "qbayes/grid.hpp"
#include "qbayes/likelihood.hpp"
#include "qbayes/rng.hpp"

namespace qbayes {

struct GroverInstance {
  std::size_t n_items = 8;
  std::vector<std::size_t> marked;
  bool noisy = false;

  /// Items are grid points, so n_items must be a power of two (at least 2).
  HypothesisGrid grid() const;
  void validate() const;
};

/// P(1|x) = 1 on marked items, 0 elsewhere; Gamma = 1.
LikelihoodModel grover_model(const GroverInstance& instance);
/// P(1|x) = 2/3 on the marked item, 1/3 elsewhere; Gamma = 1.
LikelihoodModel noisy_grover_model(const GroverInstance& instance);

struct GroverResult {
  DiscreteDistribution posterior;
  std::uint64_t queries = 0;
};

/// Uniform prior, one exact update with the pretended outcome 1.
GroverResult grover_via_bayes(const GroverInstance& instance);

struct NoisyGroverTrace {
  std::vector<double> marked_probability;  // index 0 = prior 1/N
  std::vector<double> herald_probability;  // success probability of each quantum update
  std::size_t updates = 0;
  /// Herald outcomes of the simulated quantum updates (pretended evidence is still 1).
  std::vector<int> herald_bits;
};

/// Repeats the pretended-success update until P(x_m) >= target, and runs the
/// heralded quantum update alongside, measuring its herald each step.
NoisyGroverTrace noisy_grover_inference(const GroverInstance& instance, Rng& rng, double target = 0.5,
                                        std::size_t max_updates = 4096);

/// p_{k+1} = 2 p_k / (1 + p_k).
double doubling_step(double p);

}  // namespace qbayes
