#include "qbayes/filtering.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qbayes/exact_bayes.hpp"
#include "qbayes/kernels.hpp"
#include "qbayes/likelihood.hpp"

namespace qbayes {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_line(const HypothesisGrid& grid, const char* who) {
  if (grid.dims() != 1) throw std::invalid_argument(std::string(who) + ": filtering needs a one-dimensional grid");
}
}  // namespace

std::pair<double, double> precession_likelihood(double omega, double omega_minus, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("precession_likelihood: t must be >= 0");
  const double c = std::cos((omega - omega_minus) * t);
  const double p1 = c * c;
  return {p1, 1.0 - p1};
}

double hyperparam_likelihood(double mu, double sigma, double /*omega_minus*/, double t) {
  if (!(sigma >= 0.0) || !(t >= 0.0)) throw std::invalid_argument("hyperparam_likelihood: sigma and t must be >= 0");
  return 0.5 * (std::exp(-0.5 * sigma * sigma * t * t) * std::cos(mu * t) + 1.0);
}

ConvolutionKernel make_kernel(std::vector<double> q, double gamma) {
  const std::size_t n = q.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("kernel: length must be a power of two");
  double total = 0.0;
  for (double v : q) {
    if (!(v >= 0.0)) throw std::invalid_argument("kernel: weights must be nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("kernel: weights must sum to one");
  std::vector<cplx> spec(q.begin(), q.end());
  kernels::par::fft(spec, +1);
  ConvolutionKernel k;
  k.q = std::move(q);
  k.q_hat.resize(n);
  double top = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(spec[i].imag()) > 1e-10) throw std::invalid_argument("kernel: spectrum must be real (symmetric kernel)");
    k.q_hat[i] = spec[i].real();
    top = std::max(top, std::abs(k.q_hat[i]));
  }
  k.gamma = gamma > 0.0 ? gamma : std::max(1.0, top);
  if (k.gamma < top * (1.0 - 1e-12)) throw std::invalid_argument("kernel: gamma below max |q_hat|");
  return k;
}

ConvolutionKernel delta_kernel(std::size_t n) {
  std::vector<double> q(n, 0.0);
  if (n > 0) q[0] = 1.0;
  return make_kernel(std::move(q));
}

ConvolutionKernel wrapped_gaussian_kernel(std::size_t n, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("wrapped_gaussian_kernel: sigma must be positive");
  std::vector<double> q(n);
  double total = 0.0;
  const int wraps = 2 + static_cast<int>(std::ceil(6.0 * sigma));
  for (std::size_t j = 0; j < n; ++j) {
    const double d = static_cast<double>(j) / static_cast<double>(n);
    double v = 0.0;
    for (int w = -wraps; w <= wraps; ++w) {
      const double z = (d + w) / sigma;
      v += std::exp(-0.5 * z * z);
    }
    q[j] = v;
    total += v;
  }
  for (double& v : q) v /= total;
  // Enforce exact mirror symmetry so the spectrum is real to rounding.
  for (std::size_t j = 1; j < n / 2; ++j) {
    const double s = 0.5 * (q[j] + q[n - j]);
    q[j] = s;
    q[n - j] = s;
  }
  return make_kernel(std::move(q));
}

std::pair<double, double> circular_moments(const DiscreteDistribution& dist) {
  require_line(dist.grid(), "circular_moments");
  cplx z{0.0, 0.0};
  for (std::size_t j = 0; j < dist.size(); ++j) z += dist[j] * std::polar(1.0, kTwoPi * dist.grid().coord(j, 0));
  double mean = std::arg(z) / kTwoPi;
  if (mean < 0.0) mean += 1.0;
  double var = 0.0;
  for (std::size_t j = 0; j < dist.size(); ++j) {
    double d = dist.grid().coord(j, 0) - mean;
    d -= std::round(d);
    var += dist[j] * d * d;
  }
  return {mean, var};
}

DiscreteDistribution classical_convolve(const DiscreteDistribution& p, const ConvolutionKernel& kernel) {
  require_line(p.grid(), "classical_convolve");
  if (kernel.q.size() != p.size()) throw std::invalid_argument("classical_convolve: kernel length mismatch");
  std::vector<double> out(p.size());
  kernels::par::circular_convolve(p.weights(), kernel.q, out);
  return DiscreteDistribution::normalized(p.grid(), std::move(out));
}

QuantumState filter_heralded(const QuantumState& state, const ConvolutionKernel& kernel) {
  require_line(state.grid(), "quantum_convolve");
  if (state.layout().size() != 1) throw std::invalid_argument("quantum_convolve: state must be a bare hypothesis register");
  const std::size_t n = state.size();
  if (kernel.q_hat.size() != n) throw std::invalid_argument("quantum_convolve: kernel length mismatch");
  for (const auto& a : state.amplitudes())
    if (std::abs(a.imag()) > 1e-12 || a.real() < -1e-12)
      throw std::invalid_argument("quantum_convolve: amplitudes must be real and nonnegative");
  std::vector<double> factor(n);
  for (std::size_t k = 0; k < n; ++k) {
    if (kernel.q_hat[k] < -1e-12)
      throw std::invalid_argument("quantum_convolve: kernel spectrum has a negative entry at frequency " +
                                  std::to_string(k));
    factor[k] = std::clamp(kernel.q_hat[k] / kernel.gamma, 0.0, 1.0);
  }
  const QuantumState freq = qft(state);
  const QuantumState heralded =
      freq.append_register(Register{"filter", 2, RegisterKind::herald}, [&](std::size_t k, std::span<cplx> b) {
        b[0] = std::sqrt(1.0 - factor[k]);
        b[1] = std::sqrt(factor[k]);
      });
  return inverse_qft(heralded);
}

FilterOutcome filter_success_branch(const QuantumState& state, const ConvolutionKernel& kernel) {
  const QuantumState back = filter_heralded(state, kernel);
  const auto success = all_heralds_one(back);
  return {true, back.probability(success), back.condition(success, back.registers_of_kind(RegisterKind::herald))};
}

FilterOutcome quantum_convolve(const QuantumState& state, const ConvolutionKernel& kernel, Rng& rng) {
  const QuantumState back = filter_heralded(state, kernel);
  FilterOutcome out{false, herald_success_probability(back), state};
  HeraldMeasurement m = measure_herald(back, rng);
  out.success = m.success;
  out.post = std::move(m.post);
  return out;
}

QuantumState quantum_convolve_until_success(const QuantumState& state, const ConvolutionKernel& kernel, Rng& rng,
                                            std::uint64_t* attempts) {
  std::uint64_t tries = 0;
  for (;;) {
    ++tries;
    FilterOutcome f = quantum_convolve(state, kernel, rng);
    if (f.success) {
      if (attempts) *attempts = tries;
      return std::move(f.post);
    }
    if (!(f.success_probability > 0.0)) throw std::invalid_argument("quantum_convolve: success probability is zero");
  }
}

TrackingResult run_tracking(const TrackingConfig& config, Rng& rng) {
  if (config.steps <= config.burn_in || config.burn_in < 0)
    throw std::invalid_argument("tracking: steps must exceed burn_in");
  const HypothesisGrid grid(1, config.bits);
  const ConvolutionKernel kernel = wrapped_gaussian_kernel(grid.size(), config.kernel_sigma);
  Eigen::VectorXd mu(1);
  mu << config.start;
  Eigen::MatrixXd sigma(1, 1);
  sigma << config.start_sigma * config.start_sigma;
  DiscreteDistribution belief = discretize_gaussian(grid, mu, sigma);

  TrackingResult out;
  Rng walk = rng.split({stream_id::kFiltering, 0});
  Rng herald = rng.split({stream_id::kFiltering, 1});
  Rng evidence = rng.split({stream_id::kFiltering, 2});
  double truth = config.start;
  double prev_updated = circular_moments(belief).second;
  double sum_alpha = 0.0, sum_beta = 0.0, sum_steady = 0.0;
  int counted = 0;

  for (int s = 0; s < config.steps; ++s) {
    truth += config.drift_sigma * walk.normal();
    if (truth < 0.2) truth = 0.4 - truth;
    if (truth > 0.8) truth = 1.6 - truth;

    std::uint64_t tries = 0;
    const QuantumState filtered = quantum_convolve_until_success(prepare_state(belief), kernel, herald, &tries);
    out.filter_attempts += tries;
    belief = filtered.hypothesis_marginal();
    const auto [m_f, v_f] = circular_moments(belief);

    const double t = config.contrast / std::sqrt(std::max(v_f, 1e-12));
    const double omega_minus = m_f - std::numbers::pi / (4.0 * t);
    const LikelihoodModel model = make_precession_model(grid, omega_minus, t);
    const double p1 = precession_likelihood(truth, omega_minus, t).first;
    const std::size_t outcome = evidence.uniform() < p1 ? 1 : 0;
    belief = bayes_update(belief, model, outcome);
    const auto [m_u, v_u] = circular_moments(belief);

    out.truth.push_back(truth);
    out.mean.push_back(m_u);
    out.var_filtered.push_back(v_f);
    out.var_updated.push_back(v_u);
    if (s >= config.burn_in) {
      sum_alpha += v_u / v_f;
      sum_beta += v_f - prev_updated;
      sum_steady += v_f;
      ++counted;
    }
    prev_updated = v_u;
  }
  out.alpha = sum_alpha / counted;
  out.beta = sum_beta / counted;
  out.predicted = out.beta / (1.0 - out.alpha);
  out.steady = sum_steady / counted;
  return out;
}

}  // namespace qbayes
