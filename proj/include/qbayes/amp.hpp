#pragma once

// Amplitude amplification and estimation on the two-dimensional invariant
// subspace spanned by the good and bad branches of a state.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qbayes/qsim.hpp"
#include "qbayes/rng.hpp"

namespace qbayes {

/// U|0> = sqrt(a)|good> + sqrt(1-a)|bad>. The branch vectors are empty for
/// abstract branches built from a probability alone.
struct BranchState {
  double a = 0.0;
  double theta = 0.0;
  std::vector<cplx> good;
  std::vector<cplx> bad;
  std::string marked = "marked";
  /// a == 0 or a == 1: amplification has nothing to rotate.
  bool degenerate = false;
};

BranchState to_branch(const QuantumState& state, const std::function<bool(std::size_t)>& marked,
                      std::string description = "marked");
BranchState branch_from_probability(double a);

/// theta' = (2m+1) theta. The branch vectors are unchanged; only the mixing angle moves.
BranchState grover_power(const BranchState& branch, int m);

struct EstimationOutcome {
  double estimate = 0.0;
  /// Grover iterates applied, counted as reflection pairs.
  std::uint64_t grover_applications = 0;
  /// Uses of U or U^dagger (state preparations), i.e. oracle calls per update.
  std::uint64_t unitary_calls = 0;
  int repetitions = 0;
  int t_bits = 0;
  int m = 0;
};

/// Phase-estimation outcome distribution over y in [0, M): 1/2 F(y/M - theta/pi) + 1/2 F(y/M + theta/pi).
std::vector<double> estimation_distribution(double theta, int t_bits);

/// Median of r draws of sin^2(pi y / M), M = 2^t_bits. r must be odd.
EstimationOutcome amplitude_estimate(const BranchState& branch, int t_bits, int r, Rng& rng);

/// Single-draw error bound 2 pi sqrt(a(1-a))/M + pi^2/M^2.
double estimation_error_bound(double a, int t_bits);

/// Smallest t with estimation_error_bound(min(a_upper, 1/2), t) <= tolerance.
int bits_for_error(double tolerance, double a_upper = 0.5);

/// m = floor((pi / (2 asin sqrt(a0)) - 1) / 2).
int amplification_rounds(double a0);

/// sin^2(asin(sqrt(y)) / (2m+1)).
double invert_amplified(double y, int m);

/// Estimates a <= a0 by estimating y = sin^2((2m+1) theta) and inverting.
/// t is the smallest with angle error pi/M scaled by sin(2 theta0)/(2m+1), theta0 = asin sqrt(a0), within epsilon.
EstimationOutcome prior_amplified_estimate(const BranchState& branch, double a0, double epsilon, Rng& rng,
                                           int r = 11);

struct AmplificationRun {
  std::uint64_t grover_count = 0;
  std::uint64_t attempts = 0;
};

/// m* = floor(pi/(4 theta) - 1/2) Grover steps, measure, repeat on failure.
AmplificationRun amplify_until_success(const BranchState& branch, Rng& rng);

struct AmplifiedState {
  QuantumState post;
  std::uint64_t grover_count = 0;
  std::uint64_t attempts = 0;
};

/// As above on a concrete state; herald registers are removed from the
/// success-conditioned result. Charges (2 m* + 1) * (herald count) oracle
/// calls per attempt to `model`.
AmplifiedState amplify_until_success(const QuantumState& state, const std::function<bool(std::size_t)>& marked,
                                     const LikelihoodModel& model, Rng& rng);

// Probability estimation strategy shared by the moment and utility estimators.

enum class EstimatorKind {
  amplitude,  // simulated amplitude estimation
  exact,      // the true probability, no noise
  perturbed,  // true probability plus uniform noise in [-tolerance, tolerance]
};

struct ProbabilityEstimator {
  EstimatorKind kind = EstimatorKind::amplitude;
  int repetitions = 11;

  /// Estimate of probability a to within `tolerance`; `a_upper` is a known
  /// upper bound on a used to size the register.
  EstimationOutcome estimate(double a, double tolerance, Rng& rng, double a_upper = 0.5) const;
};

}  // namespace qbayes
