#pragma once

#include "qbayes/grid.hpp"
#include "qbayes/likelihood.hpp"

namespace qbayes {

/// Mesh spacing and qubit count sufficient for a posterior-mean error target.
struct MeshPrescription {
  double epsilon = 0.0;
  double delta_x = 0.0;
  int qubits = 0;
  /// Bits per axis, ceil(log2(1/delta_x)); qubits = dims * bits_per_dim.
  int bits_per_dim = 0;
  /// Largest admissible epsilon for these inputs.
  double epsilon_limit = 0.0;
};

/// Spacing that keeps the discretized posterior mean within epsilon:
///   delta_x = eps * inner^2 / (inner^2 + 3 D Lambda),
/// valid when eps <= (inner^2 + 3 D Lambda) / (2 D Lambda inner), where
/// inner = min_E <P(E|x), P(x)>. Throws std::invalid_argument naming the
/// violated inequality otherwise.
MeshPrescription mesh_bound(double epsilon, int dims, double lipschitz, double inner);

/// Max finite-difference slope of P(E|x) over all outcomes, axes and adjacent
/// grid points. Approximate: it under-estimates the true sup between points.
double estimate_lipschitz(const LikelihoodModel& model);

/// Lipschitz bound from the model if it carries one, else estimate_lipschitz.
/// `approximate` is set when the estimate was used.
double lipschitz_or_estimate(const LikelihoodModel& model, bool* approximate = nullptr);

}  // namespace qbayes
