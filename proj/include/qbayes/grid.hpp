#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "qbayes/kernels.hpp"

namespace qbayes {

/// Uniform mesh of [0,1]^dims with 2^bits cell centroids per axis.
///
/// Points sit at (i + 1/2) * 2^-bits, so neither endpoint of an axis is ever a
/// grid point. Flat index j packs the per-axis indices with axis 0 least
/// significant.
class HypothesisGrid {
 public:
  HypothesisGrid(int dims, int bits);

  int dims() const { return dims_; }
  int bits() const { return bits_; }
  std::size_t points_per_axis() const { return std::size_t{1} << bits_; }
  std::size_t size() const { return std::size_t{1} << (static_cast<std::size_t>(bits_) * dims_); }
  double spacing() const { return 1.0 / static_cast<double>(points_per_axis()); }

  double coord(std::size_t j, int axis) const { return view().coord(j, axis); }
  Eigen::VectorXd point(std::size_t j) const;
  /// Flat index of the cell containing x (coordinates clamped into [0,1]).
  std::size_t nearest(const Eigen::VectorXd& x) const;

  kernels::MeshView view() const { return {dims_, bits_}; }

  friend bool operator==(const HypothesisGrid&, const HypothesisGrid&) = default;

 private:
  int dims_;
  int bits_;
};

/// Normalized probability vector over a HypothesisGrid.
class DiscreteDistribution {
 public:
  /// Takes weights that already sum to one (within 1e-12) and are nonnegative.
  DiscreteDistribution(HypothesisGrid grid, std::vector<double> weights);

  /// Renormalizes arbitrary nonnegative weights with positive total.
  static DiscreteDistribution normalized(HypothesisGrid grid, std::vector<double> weights);
  static DiscreteDistribution uniform(HypothesisGrid grid);
  static DiscreteDistribution point_mass(HypothesisGrid grid, std::size_t j);

  const HypothesisGrid& grid() const { return grid_; }
  std::span<const double> weights() const { return weights_; }
  double operator[](std::size_t j) const { return weights_[j]; }
  std::size_t size() const { return weights_.size(); }

 private:
  HypothesisGrid grid_;
  std::vector<double> weights_;
};

struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

Moments moments(const DiscreteDistribution& dist);

/// Gaussian density evaluated at the grid points and renormalized over the
/// grid (a truncated Gaussian). Throws std::invalid_argument unless sigma is
/// symmetric positive definite.
DiscreteDistribution discretize_gaussian(const HypothesisGrid& grid, const Eigen::VectorXd& mu,
                                         const Eigen::MatrixXd& sigma);

/// Total variation distance between two distributions on the same grid.
double total_variation(const DiscreteDistribution& a, const DiscreteDistribution& b);

}  // namespace qbayes
