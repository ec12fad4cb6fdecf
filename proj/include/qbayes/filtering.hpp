#pragma once

// Convolution filtering of a belief state for drifting latent variables, in
// the distribution domain (classical reference) and in the amplitude domain
// through the Fourier transform and a heralded multiply.
//
// All routines here work on one-dimensional grids, treated as a circle.

#include <cstdint>
#include <utility>
#include <vector>

#include "qbayes/grid.hpp"
#include "qbayes/qsim.hpp"
#include "qbayes/rng.hpp"

namespace qbayes {

/// (P(1), P(0)) = (cos^2((omega - omega_minus) t), sin^2(...)).
std::pair<double, double> precession_likelihood(double omega, double omega_minus, double t);

/// 1/2 (exp(-sigma^2 t^2 / 2) cos(mu t) + 1). omega_minus does not enter this form.
double hyperparam_likelihood(double mu, double sigma, double omega_minus, double t);

/// Kernel distribution q on the circle (index 0 = zero shift) and its
/// unnormalized spectrum q_hat(k) = sum_j q_j e^{2 pi i jk/N}, so q_hat(0) = 1.
struct ConvolutionKernel {
  std::vector<double> q;
  std::vector<double> q_hat;
  double gamma = 1.0;
};

/// Builds the spectrum; gamma defaults to max(1, max |q_hat|). Throws unless
/// q is a probability vector of power-of-two length with a real spectrum.
ConvolutionKernel make_kernel(std::vector<double> q, double gamma = 0.0);
ConvolutionKernel delta_kernel(std::size_t n);
/// Wrapped Gaussian with standard deviation sigma (in units of the unit circle), sampled at shifts j/N.
ConvolutionKernel wrapped_gaussian_kernel(std::size_t n, double sigma);

/// Circular mean and variance of a distribution on a 1-D grid: the variance
/// is taken about the circular mean with wrapped distances.
std::pair<double, double> circular_moments(const DiscreteDistribution& dist);

/// (P * Q)_j = sum_k P_k Q_{(j - k) mod N}, renormalized.
DiscreteDistribution classical_convolve(const DiscreteDistribution& p, const ConvolutionKernel& kernel);

struct FilterOutcome {
  bool success = false;
  /// Probability of the success herald, sum_k |omega_k|^2 q_hat(k) / gamma.
  double success_probability = 0.0;
  QuantumState post;
};

/// The heralded state before measurement: Fourier transform, herald
/// amplitude sqrt(q_hat(k)/gamma) at frequency k, inverse transform.
QuantumState filter_heralded(const QuantumState& state, const ConvolutionKernel& kernel);

/// The success branch of filter_heralded, without sampling.
FilterOutcome filter_success_branch(const QuantumState& state, const ConvolutionKernel& kernel);

/// filter_heralded followed by a herald measurement.
FilterOutcome quantum_convolve(const QuantumState& state, const ConvolutionKernel& kernel, Rng& rng);

/// Repeats quantum_convolve on fresh copies of the input until the herald
/// succeeds; `attempts` receives the number of tries.
QuantumState quantum_convolve_until_success(const QuantumState& state, const ConvolutionKernel& kernel, Rng& rng,
                                            std::uint64_t* attempts = nullptr);

struct TrackingConfig {
  int bits = 8;
  int steps = 300;
  int burn_in = 100;
  double start = 0.5;
  double start_sigma = 0.05;
  double drift_sigma = 0.004;  // per-step random-walk step of the true value
  double kernel_sigma = 0.01;
  double contrast = 0.25;      // t = contrast / posterior std
};

struct TrackingResult {
  std::vector<double> truth;
  std::vector<double> mean;
  std::vector<double> var_filtered;  // after the filter, before the update
  std::vector<double> var_updated;   // after the update
  double alpha = 0.0;                // mean var_updated / var_filtered after burn-in
  double beta = 0.0;                 // mean var_filtered - previous var_updated after burn-in
  double predicted = 0.0;            // beta / (1 - alpha)
  double steady = 0.0;               // mean var_filtered after burn-in
  std::uint64_t filter_attempts = 0;
};

/// Filter-then-update tracking of a drifting precession frequency.
TrackingResult run_tracking(const TrackingConfig& config, Rng& rng);

}  // namespace qbayes
