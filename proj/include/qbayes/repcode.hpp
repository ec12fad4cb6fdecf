#pragma once

// Moment protection with K copies of a belief state plus a mean register.
// The K-fold product state is never built: every quantity follows from the
// single-copy distribution and independence.

#include <cstdint>
#include <vector>

#include "qbayes/grid.hpp"
#include "qbayes/rng.hpp"

namespace qbayes {

/// Distribution on the lattice origin + step * i, i = 0..weights.size()-1.
struct LatticeDistribution {
  double origin = 0.0;
  double step = 1.0;
  std::vector<double> weights;

  double value(std::size_t i) const { return origin + step * static_cast<double>(i); }
  double mean() const;
  double max_value() const;
};

/// One-dimensional grid distribution as a lattice (origin = dx/2, step = dx).
LatticeDistribution lattice_of(const DiscreteDistribution& dist);

/// ceil((3 mu x_max / delta_tol^2) ln(1/fail_prob)), at least 1.
std::uint64_t required_copies(double mu, double x_max, double delta_tol, double fail_prob);
/// ceil((3 mu x_max / delta_tol^2) ln(L^2/eps)), at least 1.
std::uint64_t required_copies_sequential(double mu, double x_max, double delta_tol, std::uint64_t L, double eps);
/// exp(-delta_tol^2 K / (3 mu x_max)).
double chernoff_tail(double mu, double x_max, double delta_tol, std::uint64_t K);

struct MeanRegister {
  std::uint64_t copies = 0;
  double width = 0.0;
  bool exact = true;
  std::uint64_t draws = 0;  // Monte Carlo draws when not exact
  /// Distribution of the sample mean: means[s] = origin + step * s / K with probability mass[s].
  std::vector<double> means;
  std::vector<double> mass;
  /// Register readout floor(mean / width) -> probability, indexed from bin `first_bin`.
  std::int64_t first_bin = 0;
  std::vector<double> bins;

  /// Mass with |mean - mu| <= delta_tol.
  double window_mass(double mu, double delta_tol) const;
  /// Standard error of window_mass (0 when exact).
  double window_stderr(double mu, double delta_tol) const;
};

inline constexpr std::uint64_t kExactCopiesLimit = 64;

/// Exact K-fold convolution for K <= 64, otherwise a histogram of `draws` Monte Carlo sums.
MeanRegister mean_register_distribution(const LatticeDistribution& dist, std::uint64_t K, double width,
                                        std::uint64_t key, std::uint64_t draws = 100000);

struct RepetitionPlan {
  std::uint64_t copies = 1;
  double precision = 0.05;  // delta_tol
  double mu = 0.5;
  double x_max = 1.0;
  std::uint64_t rounds = 1;
  double eps = 0.01;

  /// Per-round failure budget eps / L^2 matching the sequential copy count.
  double round_failure() const { return eps / static_cast<double>(rounds * rounds); }
};

RepetitionPlan sequential_plan(double mu, double x_max, double delta_tol, std::uint64_t rounds, double eps);

struct RoundsResult {
  std::vector<double> overlap;      // |<psi|phi>|^2 per round
  std::vector<double> mean;         // measured sample mean per round
  std::vector<double> mean_square;  // measured sample mean of x^2 per round
  std::vector<double> std_estimate; // sqrt(mean_square - mean^2)
  std::uint64_t failures = 0;       // rounds with overlap < 1 - round_failure()
};

/// Each round measures whether the mean register lies within delta_tol of mu
/// (a two-outcome projector); the post-measurement overlap with the
/// unmeasured state is the probability of the observed outcome. The sampled
/// means come from K explicit draws per round.
RoundsResult simulate_protected_rounds(const LatticeDistribution& dist, const RepetitionPlan& plan,
                                       const MeanRegister& reg, Rng& rng);

/// Total variation between the single-copy marginal conditioned on the
/// window outcome and the unconditioned distribution. Exact; K <= 64.
double conditional_marginal_tv(const LatticeDistribution& dist, std::uint64_t K, double mu, double delta_tol);

}  // namespace qbayes
