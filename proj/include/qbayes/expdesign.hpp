#pragma once

// Quantum-estimated Bayes utility and its gradient over experiment controls.
//
// With mu_d the posterior mean after outcome d, the utility decomposes as
//   U = -sum_d sum_x P(x) P(d|x) |x|^2 + sum_d N(d) / P(d),
//   N(d) = |sum_x P(x) P(d|x) x|^2,
// and the cross and quadruple terms of the expanded square both equal
// sum_d N(d)/P(d). Each term is estimated as the probability of a marked
// ancilla and reassembled as -double + 2 cross - quad.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "qbayes/amp.hpp"
#include "qbayes/exact_bayes.hpp"
#include "qbayes/grid.hpp"
#include "qbayes/likelihood.hpp"
#include "qbayes/rng.hpp"

namespace qbayes {

enum class IntegralTerm { double_term, cross, quad };

struct TermEstimate {
  double value = 0.0;
  std::uint64_t oracle_queries = 0;
  /// True when the two-copy cap a0 >= 1 (or was undercut) and plain estimation was used.
  bool plain_fallback = false;
};

/// P(d) to within `tolerance`; one oracle call per state preparation.
/// `floor` is a known lower bound on P(d); without one the exact value is
/// read from a private copy of the model. Throws FloorViolation when tolerance > floor/2.
TermEstimate estimate_evidence_prob(const DiscreteDistribution& prior, const LikelihoodModel& model, std::size_t d,
                                    double tolerance, const ProbabilityEstimator& estimator, Rng& rng,
                                    std::optional<double> floor = std::nullopt);

/// double: D_out * dims * P(ancilla = 1) for amplitudes sqrt(P(d|x) |x|^2 / dims), d uniform.
/// cross / quad: N(d) from a two-copy state, amplified with a0 = (p_tilde + p_tolerance)^2 / dims.
/// `d`, `p_tilde` and `p_tolerance` are ignored for the double term.
TermEstimate estimate_integral_term(const DiscreteDistribution& prior, const LikelihoodModel& model, IntegralTerm term,
                                    std::size_t d, double tolerance, double p_tilde, double p_tolerance,
                                    const ProbabilityEstimator& estimator, Rng& rng);

struct UtilityEstimate {
  double value = 0.0;
  double term1 = 0.0;
  double term2 = 0.0;
  double term3 = 0.0;
  std::vector<double> evidence;     // P~(d)
  std::vector<double> cross;        // N~(d) used in the cross term
  std::vector<double> quad;         // N~(d) used in the quad term
  double epsilon0 = 0.0;
  /// |value - exact| <= bound_factor * epsilon0 when every estimate meets its tolerance.
  double bound_factor = 1.0;
  std::uint64_t oracle_queries = 0;
  bool plain_fallback = false;
};

/// Budget: epsilon0/4 for the double term and epsilon0/(4 D_out) for each
/// ratio N~/P~. Each ratio is met by |dP| <= r/4 and |dN| <= r P/4, using
///   |N~/P~ - N/P| <= 2|dN|/P + 2|dP|  whenever |dP| <= P/2.
/// Throws FloorViolation if some P~(d) < 2 epsilon0.
UtilityEstimate utility_quantum(const DiscreteDistribution& prior, const LikelihoodModel& model, double epsilon0,
                                Rng& rng, const ProbabilityEstimator& estimator = {},
                                std::optional<double> floor = std::nullopt);

/// epsilon0 = epsilon^{3/2} / sqrt(M3).
double gradient_budget(double epsilon, double m3);
/// delta = (epsilon0 / M3)^{1/3}.
double gradient_step(double epsilon0, double m3);

struct GradientEstimate {
  Eigen::VectorXd value;
  double epsilon0 = 0.0;
  double step = 0.0;
  std::uint64_t oracle_queries = 0;
};

/// Centered differences of utility_quantum with the balanced step.
GradientEstimate gradient_quantum(const DiscreteDistribution& prior, const ControlledModel& family,
                                  const ExperimentControl& control, double epsilon, double m3, Rng& rng,
                                  const ProbabilityEstimator& estimator = {});

/// Largest |third difference| of the exact utility along each control axis,
/// sampled at `samples` points over [lo, hi] with step h, times a safety factor of 2.
/// A coarse heuristic, not a bound.
double estimate_m3(const DiscreteDistribution& prior, const ControlledModel& family, const ExperimentControl& lo,
                   const ExperimentControl& hi, int samples = 9, double h = 0.05);

struct AscentResult {
  ExperimentControl control;
  std::vector<ExperimentControl> controls;  // per step, index 0 = start
  std::vector<double> risk;                 // exact Bayes risk per step
  std::uint64_t oracle_queries = 0;
};

/// c <- clamp(c + rate * gradient_quantum(c), lo, hi) for `steps` steps.
AscentResult design_ascent(const DiscreteDistribution& prior, const ControlledModel& family,
                           const ExperimentControl& c0, int steps, double rate, double epsilon, double m3, Rng& rng,
                           const ExperimentControl& lo, const ExperimentControl& hi,
                           const ProbabilityEstimator& estimator = {});

}  // namespace qbayes
