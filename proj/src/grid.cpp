#include "qbayes/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qbayes {

HypothesisGrid::HypothesisGrid(int dims, int bits) : dims_(dims), bits_(bits) {
  if (dims < 1) throw std::invalid_argument("grid: dims must be >= 1");
  if (bits < 1) throw std::invalid_argument("grid: bits_per_dim must be >= 1");
  if (static_cast<long>(dims) * bits > 40) throw std::invalid_argument("grid: more than 2^40 points");
}

Eigen::VectorXd HypothesisGrid::point(std::size_t j) const {
  Eigen::VectorXd x(dims_);
  for (int i = 0; i < dims_; ++i) x[i] = coord(j, i);
  return x;
}

std::size_t HypothesisGrid::nearest(const Eigen::VectorXd& x) const {
  const auto per_axis = static_cast<double>(points_per_axis());
  std::size_t j = 0;
  for (int i = 0; i < dims_; ++i) {
    double c = std::clamp(x[i], 0.0, 1.0);
    auto idx = static_cast<std::size_t>(std::floor(c * per_axis));
    idx = std::min(idx, points_per_axis() - 1);
    j |= idx << (static_cast<std::size_t>(bits_) * i);
  }
  return j;
}

DiscreteDistribution::DiscreteDistribution(HypothesisGrid grid, std::vector<double> weights)
    : grid_(grid), weights_(std::move(weights)) {
  if (weights_.size() != grid_.size())
    throw std::invalid_argument("distribution: weight count " + std::to_string(weights_.size()) +
                                " does not match grid size " + std::to_string(grid_.size()));
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw std::invalid_argument("distribution: negative or NaN weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("distribution: weights do not sum to 1");
}

DiscreteDistribution DiscreteDistribution::normalized(HypothesisGrid grid, std::vector<double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("distribution: negative or NaN weight");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("distribution: total weight is zero");
  for (double& w : weights) w /= total;
  return {grid, std::move(weights)};
}

DiscreteDistribution DiscreteDistribution::uniform(HypothesisGrid grid) {
  return {grid, std::vector<double>(grid.size(), 1.0 / static_cast<double>(grid.size()))};
}

DiscreteDistribution DiscreteDistribution::point_mass(HypothesisGrid grid, std::size_t j) {
  if (j >= grid.size()) throw std::invalid_argument("distribution: point mass index out of range");
  std::vector<double> w(grid.size(), 0.0);
  w[j] = 1.0;
  return {grid, std::move(w)};
}

Moments moments(const DiscreteDistribution& dist) {
  const auto raw = kernels::par::raw_moments(dist.weights(), dist.grid().view());
  const int d = dist.grid().dims();
  Moments m{Eigen::VectorXd(d), Eigen::MatrixXd(d, d)};
  for (int i = 0; i < d; ++i) m.mean[i] = raw.first[i];
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) m.cov(i, k) = raw.second[i * d + k] - m.mean[i] * m.mean[k];
  // Symmetric by construction up to rounding; enforce exactly.
  m.cov = 0.5 * (m.cov + m.cov.transpose()).eval();
  return m;
}

DiscreteDistribution discretize_gaussian(const HypothesisGrid& grid, const Eigen::VectorXd& mu,
                                         const Eigen::MatrixXd& sigma) {
  const int d = grid.dims();
  if (mu.size() != d || sigma.rows() != d || sigma.cols() != d)
    throw std::invalid_argument("discretize_gaussian: dimension mismatch");
  if (!sigma.isApprox(sigma.transpose(), 1e-12))
    throw std::invalid_argument("discretize_gaussian: covariance is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("discretize_gaussian: covariance is not positive definite");
  const Eigen::MatrixXd precision = llt.solve(Eigen::MatrixXd::Identity(d, d));

  const std::size_t n = grid.size();
  std::vector<double> w(n);
  const auto mesh = grid.view();
  // Log-weights are shifted by their maximum before exponentiating so very
  // narrow Gaussians far from every grid point do not underflow to zero.
  std::vector<double> logw(n);
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < n; ++j) {
    Eigen::VectorXd dx(d);
    for (int i = 0; i < d; ++i) dx[i] = mesh.coord(j, i) - mu[i];
    logw[j] = -0.5 * dx.dot(precision * dx);
  }
  const double top = *std::max_element(logw.begin(), logw.end());
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < n; ++j) w[j] = std::exp(logw[j] - top);
  return DiscreteDistribution::normalized(grid, std::move(w));
}

double total_variation(const DiscreteDistribution& a, const DiscreteDistribution& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("total_variation: grid mismatch");
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::abs(a[j] - b[j]);
  return 0.5 * s;
}

}  // namespace qbayes
