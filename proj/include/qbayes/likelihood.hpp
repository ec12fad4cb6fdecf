#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qbayes/grid.hpp"

namespace qbayes {

/// Likelihood P(E | x_j) over a finite outcome set, with per-outcome bounds
/// Gamma_E and query accounting.
///
/// Two counters are kept. `queries()` counts classical evaluations: it grows
/// by exactly one per evaluated (outcome, index) pair, including each entry of
/// `row()`. `oracle_queries()` counts coherent applications of the oracle O_E
/// on a superposition; simulated quantum routines charge it through
/// `charge_oracle()` with the number of O_E calls their circuit would make.
/// Both counters accept concurrent increments.
class LikelihoodModel {
 public:
  using Evaluator = std::function<double(std::size_t outcome, std::size_t index)>;

  LikelihoodModel(HypothesisGrid grid, std::size_t outcomes, Evaluator eval, std::vector<double> gamma,
                  std::optional<double> lipschitz = std::nullopt, std::string name = "model");

  LikelihoodModel(const LikelihoodModel& other);
  LikelihoodModel& operator=(const LikelihoodModel& other);

  const HypothesisGrid& grid() const { return grid_; }
  std::size_t outcomes() const { return outcomes_; }
  double gamma(std::size_t outcome) const;
  std::optional<double> lipschitz() const { return lipschitz_; }
  const std::string& name() const { return name_; }

  /// P(E | x_j); counts one query. Unknown outcome or index throws std::invalid_argument.
  double query(std::size_t outcome, std::size_t index) const;
  /// P(E | x_j) for every grid index; counts grid().size() queries.
  std::vector<double> row(std::size_t outcome) const;
  /// The table a simulated oracle is built from; not counted as classical queries.
  std::vector<double> oracle_row(std::size_t outcome) const;

  void charge_oracle(std::uint64_t calls) const { oracle_calls_.fetch_add(calls, std::memory_order_relaxed); }
  std::uint64_t queries() const { return evaluations_.load(std::memory_order_relaxed); }
  std::uint64_t oracle_queries() const { return oracle_calls_.load(std::memory_order_relaxed); }
  void reset_counters() const;

  /// Throws GammaViolation if P(E|x_j) > Gamma_E for some j (uncounted check).
  void check_gamma(std::size_t outcome) const;

 private:
  void check_outcome(std::size_t outcome) const;

  HypothesisGrid grid_;
  std::size_t outcomes_;
  Evaluator eval_;
  std::vector<double> gamma_;
  std::optional<double> lipschitz_;
  std::string name_;
  mutable std::atomic<std::uint64_t> evaluations_{0};
  mutable std::atomic<std::uint64_t> oracle_calls_{0};
};

/// Experiment settings c (evolution time, reference frequency, ...).
struct ExperimentControl {
  Eigen::VectorXd components;

  ExperimentControl() = default;
  explicit ExperimentControl(Eigen::VectorXd c);
  ExperimentControl(std::initializer_list<double> c);

  Eigen::Index size() const { return components.size(); }
  double operator[](Eigen::Index i) const { return components[i]; }
  /// Copy displaced by h along axis j.
  ExperimentControl shifted(Eigen::Index j, double h) const;
};

/// A family of likelihood models indexed by experiment control.
using ControlledModel = std::function<LikelihoodModel(const ExperimentControl&)>;

// Catalog ---------------------------------------------------------------------

/// Explicit table: rows[E][j] = P(E|x_j). Gamma_E defaults to max_j rows[E][j] (at least 1e-300).
LikelihoodModel make_table_model(const HypothesisGrid& grid, std::vector<std::vector<double>> rows,
                                 std::optional<std::vector<double>> gamma = std::nullopt);

/// Two outcomes with P(1|x) = p everywhere, Gamma = 1.
LikelihoodModel make_constant_model(const HypothesisGrid& grid, double p);

/// P(d|x) = 1/outcomes for every d and x, Gamma = 1.
LikelihoodModel make_uninformative_model(const HypothesisGrid& grid, std::size_t outcomes = 2);

/// Precession likelihood on a one-dimensional grid with omega = x:
/// P(1|omega) = cos^2((omega - omega_minus) t), P(0|omega) = sin^2(...), Gamma = 1.
/// No Lipschitz bound is attached; use estimate_lipschitz.
LikelihoodModel make_precession_model(const HypothesisGrid& grid, double omega_minus, double t);

/// Precession family with control c = (t) or (t, omega_minus).
ControlledModel precession_family(const HypothesisGrid& grid, double omega_minus = 0.0);

}  // namespace qbayes
