#include "qbayes/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qbayes {

MeshPrescription mesh_bound(double epsilon, int dims, double lipschitz, double inner) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("mesh_bound: epsilon must be positive");
  if (dims < 1) throw std::invalid_argument("mesh_bound: dims must be >= 1");
  if (!(lipschitz > 0.0) || !std::isfinite(lipschitz))
    throw std::invalid_argument("mesh_bound: a finite positive Lipschitz bound is required");
  if (!(inner > 0.0)) throw std::invalid_argument("mesh_bound: min_E <P(E|x),P(x)> must be positive");

  const double d_lambda = dims * lipschitz;
  const double inner2 = inner * inner;
  MeshPrescription out;
  out.epsilon = epsilon;
  out.epsilon_limit = (inner2 + 3.0 * d_lambda) / (2.0 * d_lambda * inner);
  if (epsilon > out.epsilon_limit) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "mesh_bound: epsilon = " << epsilon << " violates epsilon <= (inner^2 + 3 D Lambda) / (2 D Lambda inner) = "
        << out.epsilon_limit;
    throw std::invalid_argument(msg.str());
  }
  out.delta_x = epsilon * inner2 / (inner2 + 3.0 * d_lambda);
  out.bits_per_dim = static_cast<int>(std::ceil(std::log2(1.0 / out.delta_x)));
  out.bits_per_dim = std::max(out.bits_per_dim, 1);
  out.qubits = dims * out.bits_per_dim;
  return out;
}

double estimate_lipschitz(const LikelihoodModel& model) {
  const auto& grid = model.grid();
  const std::size_t n = grid.size();
  const std::size_t per_axis = grid.points_per_axis();
  const double h = grid.spacing();
  double best = 0.0;
  for (std::size_t e = 0; e < model.outcomes(); ++e) {
    const auto r = model.row(e);
    for (int axis = 0; axis < grid.dims(); ++axis) {
      const std::size_t stride = std::size_t{1} << (static_cast<std::size_t>(grid.bits()) * axis);
      for (std::size_t j = 0; j < n; ++j) {
        const std::size_t i = (j / stride) % per_axis;
        if (i + 1 >= per_axis) continue;
        best = std::max(best, std::abs(r[j + stride] - r[j]) / h);
      }
    }
  }
  return best;
}

double lipschitz_or_estimate(const LikelihoodModel& model, bool* approximate) {
  if (model.lipschitz()) {
    if (approximate) *approximate = false;
    return *model.lipschitz();
  }
  if (approximate) *approximate = true;
  return estimate_lipschitz(model);
}

}  // namespace qbayes
