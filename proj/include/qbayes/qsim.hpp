#pragma once

// Amplitude-level statevector kernel for heralded Bayesian updates.
//
// The likelihood-value register that a gate-level circuit would compute is
// never materialized: the controlled rotation it drives is applied directly
// to the amplitudes. Herald ancillas are explicit qubits, so "update without
// measuring" and "measure the herald" are distinct operations.

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qbayes/grid.hpp"
#include "qbayes/likelihood.hpp"
#include "qbayes/rng.hpp"

namespace qbayes {

using cplx = std::complex<double>;

enum class RegisterKind { hypothesis, herald, comparison, ancilla };

struct Register {
  std::string name;
  std::size_t dim = 2;
  RegisterKind kind = RegisterKind::ancilla;
};

/// Pure state over hypothesis register (x) ancilla registers.
///
/// Flat amplitude index = sum_r value_r * stride_r, with the first register
/// (always the hypothesis register) at stride 1.
class QuantumState {
 public:
  QuantumState(HypothesisGrid grid, std::vector<Register> layout, std::vector<cplx> amplitudes);

  const HypothesisGrid& grid() const { return grid_; }
  const std::vector<Register>& layout() const { return layout_; }
  std::span<const cplx> amplitudes() const { return amps_; }
  std::size_t size() const { return amps_.size(); }

  std::size_t register_index(const std::string& name) const;
  std::size_t stride(std::size_t reg) const;
  std::size_t value(std::size_t flat, std::size_t reg) const { return (flat / stride(reg)) % layout_[reg].dim; }
  std::vector<std::size_t> registers_of_kind(RegisterKind kind) const;

  double norm_squared() const;
  /// Marginal distribution of the hypothesis register.
  DiscreteDistribution hypothesis_marginal() const;
  /// Total probability of the flat indices accepted by `marked`.
  double probability(const std::function<bool(std::size_t)>& marked) const;

  /// New state with one register appended (most significant); amplitudes map
  /// each existing basis index to `dim` new amplitudes via `branch`.
  QuantumState append_register(Register reg, const std::function<void(std::size_t, std::span<cplx>)>& branch) const;

  /// Post-selects on `marked`, renormalizes, and removes the given registers
  /// (which must be constant on the marked set).
  QuantumState condition(const std::function<bool(std::size_t)>& marked, std::span<const std::size_t> drop) const;

 private:
  HypothesisGrid grid_;
  std::vector<Register> layout_;
  std::vector<cplx> amps_;
};

/// sqrt(w_j) amplitudes on a bare hypothesis register.
QuantumState prepare_state(const DiscreteDistribution& dist);

/// Appends one herald qubit per evidence item. For evidence E_k the herald
/// factor is sqrt(P(E_k|x)/Gamma) on |1> and sqrt(1 - P(E_k|x)/Gamma) on |0>.
/// Charges evidence.size() oracle queries. Throws GammaViolation.
QuantumState coherent_update(const QuantumState& state, const LikelihoodModel& model,
                             std::span<const std::size_t> evidence);

/// Predicate selecting basis states whose herald qubits are all 1.
std::function<bool(std::size_t)> all_heralds_one(const QuantumState& state);

/// Probability that every herald reads 1.
double herald_success_probability(const QuantumState& state);

struct HeraldMeasurement {
  std::vector<int> bits;
  bool success = false;  // all bits 1
  QuantumState post;
};

/// Samples the herald string from its exact marginal, returns the conditional
/// state with the herald registers removed.
HeraldMeasurement measure_herald(const QuantumState& state, Rng& rng);

/// Discrete Fourier transform on a named register: (1/sqrt(N)) sum_j e^{+2 pi i jk/N}.
QuantumState qft(const QuantumState& state, const std::string& reg = "x");
QuantumState inverse_qft(const QuantumState& state, const std::string& reg = "x");

// Density-matrix paths ----------------------------------------------------------

inline constexpr std::size_t kDefaultDensityLimit = std::size_t{1} << 12;

/// Hermitian unit-trace operator on the hypothesis register.
class DensityState {
 public:
  explicit DensityState(Eigen::MatrixXcd rho, std::size_t max_dim = kDefaultDensityLimit);
  static DensityState pure(std::span<const cplx> amps, std::size_t max_dim = kDefaultDensityLimit);

  const Eigen::MatrixXcd& matrix() const { return rho_; }
  std::size_t dim() const { return static_cast<std::size_t>(rho_.rows()); }
  Eigen::VectorXd eigenvalues() const;

 private:
  Eigen::MatrixXcd rho_;
};

/// Trace distance 1/2 ||a - b||_1 via a Hermitian eigensolve.
double trace_distance(const DensityState& a, const DensityState& b);
double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

/// Contraction factor c_jk = sqrt(p_j p_k) + sqrt((1-p_j)(1-p_k)) with p = P(E|x)/Gamma.
double coherence_factor(double pj, double pk);

/// The update channel with the herald traced out: rho'_jk = rho_jk c_jk.
/// A non-positive gamma selects model.gamma(outcome). Throws GammaViolation.
DensityState traceout_update_map(const DensityState& rho, const LikelihoodModel& model, std::size_t outcome,
                                 double gamma = 0.0);

struct StabilityTrace {
  /// Trace distance to the channel's fixed point (the dephased initial state) per iteration, index 0 = start.
  std::vector<double> distance;
  /// Trace distance to the target basis state |x><x| per iteration.
  std::vector<double> target_distance;
  /// Largest off-diagonal contraction factor over the evidence schedule.
  double c_max = 0.0;
};

/// Repeatedly applies traceout_update_map, cycling through `schedule`.
StabilityTrace stability_iterate(const DensityState& initial, const LikelihoodModel& model,
                                 std::span<const std::size_t> schedule, std::size_t iters, std::size_t target);

/// |x> + delta sum_y a_y |y>, normalized; `perturbation` is indexed by grid point (entry `target` ignored).
DensityState perturbed_basis_state(std::size_t dim, std::size_t target, double delta,
                                   std::span<const double> perturbation);

}  // namespace qbayes
