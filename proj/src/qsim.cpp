#include "qbayes/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qbayes/errors.hpp"
#include "qbayes/kernels.hpp"

namespace qbayes {

// QuantumState -------------------------------------------------------------------

QuantumState::QuantumState(HypothesisGrid grid, std::vector<Register> layout, std::vector<cplx> amplitudes)
    : grid_(grid), layout_(std::move(layout)), amps_(std::move(amplitudes)) {
  if (layout_.empty() || layout_.front().kind != RegisterKind::hypothesis || layout_.front().dim != grid_.size())
    throw std::invalid_argument("state: first register must be the hypothesis register of the grid");
  std::size_t total = 1;
  for (const auto& r : layout_) {
    if (r.dim == 0) throw std::invalid_argument("state: zero-dimensional register " + r.name);
    total *= r.dim;
  }
  if (total != amps_.size()) throw std::invalid_argument("state: register dimensions do not match amplitude count");
  if (std::abs(norm_squared() - 1.0) > 1e-10) throw std::invalid_argument("state: amplitudes are not normalized");
}

std::size_t QuantumState::register_index(const std::string& name) const {
  for (std::size_t r = 0; r < layout_.size(); ++r)
    if (layout_[r].name == name) return r;
  throw std::invalid_argument("state: no register named '" + name + "'");
}

std::size_t QuantumState::stride(std::size_t reg) const {
  std::size_t s = 1;
  for (std::size_t r = 0; r < reg; ++r) s *= layout_[r].dim;
  return s;
}

std::vector<std::size_t> QuantumState::registers_of_kind(RegisterKind kind) const {
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < layout_.size(); ++r)
    if (layout_[r].kind == kind) out.push_back(r);
  return out;
}

double QuantumState::norm_squared() const {
  double s = 0.0;
  for (const auto& a : amps_) s += std::norm(a);
  return s;
}

DiscreteDistribution QuantumState::hypothesis_marginal() const {
  const std::size_t n = grid_.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < amps_.size(); ++i) w[i % n] += std::norm(amps_[i]);
  return DiscreteDistribution::normalized(grid_, std::move(w));
}

double QuantumState::probability(const std::function<bool(std::size_t)>& marked) const {
  double s = 0.0;
  for (std::size_t i = 0; i < amps_.size(); ++i)
    if (marked(i)) s += std::norm(amps_[i]);
  return s;
}

QuantumState QuantumState::append_register(Register reg,
                                           const std::function<void(std::size_t, std::span<cplx>)>& branch) const {
  const std::size_t base = amps_.size();
  const std::size_t dim = reg.dim;
  std::vector<cplx> out(base * dim, cplx{0.0, 0.0});
  std::vector<cplx> local(dim);
  for (std::size_t i = 0; i < base; ++i) {
    std::fill(local.begin(), local.end(), cplx{0.0, 0.0});
    branch(i, local);
    for (std::size_t v = 0; v < dim; ++v) out[i + base * v] = amps_[i] * local[v];
  }
  auto layout = layout_;
  layout.push_back(std::move(reg));
  return {grid_, std::move(layout), std::move(out)};
}

QuantumState QuantumState::condition(const std::function<bool(std::size_t)>& marked,
                                     std::span<const std::size_t> drop) const {
  std::vector<bool> dropped(layout_.size(), false);
  for (std::size_t r : drop) {
    if (r == 0 || r >= layout_.size()) throw std::invalid_argument("state: cannot drop register");
    dropped[r] = true;
  }
  std::vector<Register> layout;
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < layout_.size(); ++r)
    if (!dropped[r]) {
      layout.push_back(layout_[r]);
      keep.push_back(r);
    }
  std::size_t total = 1;
  for (const auto& r : layout) total *= r.dim;
  std::vector<cplx> out(total, cplx{0.0, 0.0});
  double mass = 0.0;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if (!marked(i)) continue;
    std::size_t idx = 0;
    std::size_t s = 1;
    for (std::size_t r : keep) {
      idx += value(i, r) * s;
      s *= layout_[r].dim;
    }
    out[idx] += amps_[i];
    mass += std::norm(amps_[i]);
  }
  if (!(mass > 0.0)) throw ImpossibleEvidence("state: conditioning on a zero-probability event");
  const double inv = 1.0 / std::sqrt(mass);
  for (auto& a : out) a *= inv;
  return {grid_, std::move(layout), std::move(out)};
}

// Updates ------------------------------------------------------------------------

QuantumState prepare_state(const DiscreteDistribution& dist) {
  std::vector<cplx> amps(dist.size());
  for (std::size_t j = 0; j < dist.size(); ++j) amps[j] = std::sqrt(dist[j]);
  return {dist.grid(), {Register{"x", dist.size(), RegisterKind::hypothesis}}, std::move(amps)};
}

QuantumState coherent_update(const QuantumState& state, const LikelihoodModel& model,
                             std::span<const std::size_t> evidence) {
  if (state.layout().size() != 1) throw std::invalid_argument("coherent_update: state must be a bare hypothesis register");
  if (!(state.grid() == model.grid())) throw std::invalid_argument("coherent_update: grid mismatch");
  const std::size_t n = state.grid().size();
  const std::size_t updates = evidence.size();
  if (updates > 24) throw std::invalid_argument("coherent_update: at most 24 herald qubits");

  std::vector<double> ratio(updates * n);
  for (std::size_t k = 0; k < updates; ++k) {
    const double gamma = model.gamma(evidence[k]);
    const auto row = model.oracle_row(evidence[k]);
    for (std::size_t j = 0; j < n; ++j) {
      double r = row[j] / gamma;
      if (r > 1.0 + 1e-12)
        throw GammaViolation("coherent_update: P(E|x_" + std::to_string(j) + ") exceeds Gamma_E", j);
      ratio[k * n + j] = std::clamp(r, 0.0, 1.0);
    }
  }
  model.charge_oracle(updates);

  std::vector<cplx> out(n << updates);
  kernels::par::herald_expand(state.amplitudes(), ratio, updates, out);
  auto layout = state.layout();
  for (std::size_t k = 0; k < updates; ++k)
    layout.push_back(Register{"herald" + std::to_string(k), 2, RegisterKind::herald});
  return {state.grid(), std::move(layout), std::move(out)};
}

std::function<bool(std::size_t)> all_heralds_one(const QuantumState& state) {
  std::vector<std::pair<std::size_t, std::size_t>> heralds;  // (stride, dim)
  for (std::size_t r : state.registers_of_kind(RegisterKind::herald))
    heralds.emplace_back(state.stride(r), state.layout()[r].dim);
  return [heralds](std::size_t i) {
    for (const auto& [stride, dim] : heralds)
      if ((i / stride) % dim != 1) return false;
    return true;
  };
}

double herald_success_probability(const QuantumState& state) { return state.probability(all_heralds_one(state)); }

HeraldMeasurement measure_herald(const QuantumState& state, Rng& rng) {
  const auto regs = state.registers_of_kind(RegisterKind::herald);
  if (regs.empty()) throw std::invalid_argument("measure_herald: no herald registers");
  const std::size_t patterns = std::size_t{1} << regs.size();
  auto pattern_of = [&](std::size_t i) {
    std::size_t s = 0;
    for (std::size_t k = 0; k < regs.size(); ++k) s |= state.value(i, regs[k]) << k;
    return s;
  };
  std::vector<double> cdf(patterns, 0.0);
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) cdf[pattern_of(i)] += std::norm(amps[i]);
  for (std::size_t s = 1; s < patterns; ++s) cdf[s] += cdf[s - 1];
  const std::size_t outcome = kernels::sample_cdf(cdf, rng.uniform());

  HeraldMeasurement m{std::vector<int>(regs.size()), outcome == patterns - 1,
                      state.condition([&](std::size_t i) { return pattern_of(i) == outcome; }, regs)};
  for (std::size_t k = 0; k < regs.size(); ++k) m.bits[k] = static_cast<int>((outcome >> k) & 1U);
  return m;
}

namespace {

QuantumState fourier(const QuantumState& state, const std::string& name, int sign) {
  const std::size_t r = state.register_index(name);
  const std::size_t dim = state.layout()[r].dim;
  if ((dim & (dim - 1)) != 0) throw std::invalid_argument("qft: register dimension must be a power of two");
  const std::size_t stride = state.stride(r);
  const auto src = state.amplitudes();
  std::vector<cplx> out(src.begin(), src.end());
  const double norm = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<cplx> line(dim);
  const std::size_t block = stride * dim;
  for (std::size_t hi = 0; hi < out.size(); hi += block) {
    for (std::size_t lo = 0; lo < stride; ++lo) {
      for (std::size_t k = 0; k < dim; ++k) line[k] = out[hi + lo + k * stride];
      kernels::par::fft(line, sign);
      for (std::size_t k = 0; k < dim; ++k) out[hi + lo + k * stride] = line[k] * norm;
    }
  }
  return {state.grid(), state.layout(), std::move(out)};
}

}  // namespace

QuantumState qft(const QuantumState& state, const std::string& reg) { return fourier(state, reg, +1); }
QuantumState inverse_qft(const QuantumState& state, const std::string& reg) { return fourier(state, reg, -1); }

// Density matrices -------------------------------------------------------------------

DensityState::DensityState(Eigen::MatrixXcd rho, std::size_t max_dim) : rho_(std::move(rho)) {
  if (rho_.rows() != rho_.cols()) throw std::invalid_argument("density: matrix must be square");
  if (static_cast<std::size_t>(rho_.rows()) > max_dim)
    throw std::invalid_argument("density: dimension exceeds the configured limit");
  if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > 1e-10) throw std::invalid_argument("density: not Hermitian");
  if (std::abs(rho_.trace() - cplx{1.0, 0.0}) > 1e-10) throw std::invalid_argument("density: trace is not 1");
  // Full spectrum check only where the eigensolve is cheap.
  if (rho_.rows() <= 512 && eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument("density: negative eigenvalue");
}

DensityState DensityState::pure(std::span<const cplx> amps, std::size_t max_dim) {
  Eigen::Map<const Eigen::VectorXcd> v(amps.data(), static_cast<Eigen::Index>(amps.size()));
  return DensityState(v * v.adjoint(), max_dim);
}

Eigen::VectorXd DensityState::eigenvalues() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho_, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const Eigen::MatrixXcd diff = a - b;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(diff, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityState& a, const DensityState& b) { return trace_distance(a.matrix(), b.matrix()); }

double coherence_factor(double pj, double pk) { return std::sqrt(pj * pk) + std::sqrt((1.0 - pj) * (1.0 - pk)); }

namespace {

void branch_amplitudes(const LikelihoodModel& model, std::size_t outcome, double gamma, std::vector<double>& s,
                       std::vector<double>& r) {
  const auto row = model.oracle_row(outcome);
  s.resize(row.size());
  r.resize(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    const double p = row[j] / gamma;
    if (p > 1.0 + 1e-12) throw GammaViolation("traceout_update_map: P(E|x_" + std::to_string(j) + ") exceeds Gamma", j);
    const double pc = std::clamp(p, 0.0, 1.0);
    s[j] = std::sqrt(pc);
    r[j] = std::sqrt(1.0 - pc);
  }
}

}  // namespace

DensityState traceout_update_map(const DensityState& rho, const LikelihoodModel& model, std::size_t outcome,
                                 double gamma) {
  if (rho.dim() != model.grid().size()) throw std::invalid_argument("traceout_update_map: dimension mismatch");
  const double g = gamma > 0.0 ? gamma : model.gamma(outcome);
  std::vector<double> s, r;
  branch_amplitudes(model, outcome, g, s, r);
  const std::size_t n = rho.dim();
  Eigen::MatrixXcd out(n, n);
  kernels::par::schur_contract({rho.matrix().data(), n * n}, s, r, {out.data(), n * n});
  return DensityState(std::move(out), std::max(n, kDefaultDensityLimit));
}

StabilityTrace stability_iterate(const DensityState& initial, const LikelihoodModel& model,
                                 std::span<const std::size_t> schedule, std::size_t iters, std::size_t target) {
  if (schedule.empty()) throw std::invalid_argument("stability_iterate: empty evidence schedule");
  const std::size_t n = initial.dim();
  if (target >= n) throw std::invalid_argument("stability_iterate: target out of range");

  StabilityTrace trace;
  std::vector<std::vector<double>> s(schedule.size()), r(schedule.size());
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    branch_amplitudes(model, schedule[k], model.gamma(schedule[k]), s[k], r[k]);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t l = j + 1; l < n; ++l)
        trace.c_max = std::max(trace.c_max, s[k][j] * s[k][l] + r[k][j] * r[k][l]);
  }

  const Eigen::MatrixXcd fixed = initial.matrix().diagonal().asDiagonal();
  Eigen::MatrixXcd target_state = Eigen::MatrixXcd::Zero(n, n);
  target_state(target, target) = 1.0;

  Eigen::MatrixXcd rho = initial.matrix();
  Eigen::MatrixXcd next(n, n);
  trace.distance.push_back(trace_distance(rho, fixed));
  trace.target_distance.push_back(trace_distance(rho, target_state));
  for (std::size_t it = 0; it < iters; ++it) {
    const std::size_t k = it % schedule.size();
    kernels::par::schur_contract({rho.data(), n * n}, s[k], r[k], {next.data(), n * n});
    rho.swap(next);
    trace.distance.push_back(trace_distance(rho, fixed));
    trace.target_distance.push_back(trace_distance(rho, target_state));
  }
  return trace;
}

DensityState perturbed_basis_state(std::size_t dim, std::size_t target, double delta,
                                   std::span<const double> perturbation) {
  if (target >= dim || perturbation.size() != dim)
    throw std::invalid_argument("perturbed_basis_state: bad target or perturbation length");
  std::vector<cplx> amps(dim);
  double norm = 0.0;
  for (std::size_t j = 0; j < dim; ++j) {
    amps[j] = j == target ? 1.0 : delta * perturbation[j];
    norm += std::norm(amps[j]);
  }
  for (auto& a : amps) a /= std::sqrt(norm);
  return DensityState::pure(amps);
}

}  // namespace qbayes
