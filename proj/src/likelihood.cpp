#include "qbayes/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "qbayes/errors.hpp"

namespace qbayes {

LikelihoodModel::LikelihoodModel(HypothesisGrid grid, std::size_t outcomes, Evaluator eval,
                                 std::vector<double> gamma, std::optional<double> lipschitz, std::string name)
    : grid_(grid),
      outcomes_(outcomes),
      eval_(std::move(eval)),
      gamma_(std::move(gamma)),
      lipschitz_(lipschitz),
      name_(std::move(name)) {
  if (outcomes_ == 0) throw std::invalid_argument("likelihood: empty outcome set");
  if (gamma_.size() != outcomes_) throw std::invalid_argument("likelihood: one Gamma per outcome required");
  for (double g : gamma_)
    if (!(g > 0.0 && g <= 1.0)) throw std::invalid_argument("likelihood: Gamma must lie in (0, 1]");
  if (lipschitz_ && !(*lipschitz_ > 0.0)) throw std::invalid_argument("likelihood: Lipschitz bound must be positive");
}

LikelihoodModel::LikelihoodModel(const LikelihoodModel& other)
    : grid_(other.grid_),
      outcomes_(other.outcomes_),
      eval_(other.eval_),
      gamma_(other.gamma_),
      lipschitz_(other.lipschitz_),
      name_(other.name_),
      evaluations_(other.queries()),
      oracle_calls_(other.oracle_queries()) {}

LikelihoodModel& LikelihoodModel::operator=(const LikelihoodModel& other) {
  if (this == &other) return *this;
  grid_ = other.grid_;
  outcomes_ = other.outcomes_;
  eval_ = other.eval_;
  gamma_ = other.gamma_;
  lipschitz_ = other.lipschitz_;
  name_ = other.name_;
  evaluations_.store(other.queries());
  oracle_calls_.store(other.oracle_queries());
  return *this;
}

void LikelihoodModel::check_outcome(std::size_t outcome) const {
  if (outcome >= outcomes_)
    throw std::invalid_argument("likelihood '" + name_ + "': unknown outcome " + std::to_string(outcome));
}

double LikelihoodModel::gamma(std::size_t outcome) const {
  check_outcome(outcome);
  return gamma_[outcome];
}

double LikelihoodModel::query(std::size_t outcome, std::size_t index) const {
  check_outcome(outcome);
  if (index >= grid_.size()) throw std::invalid_argument("likelihood: grid index out of range");
  evaluations_.fetch_add(1, std::memory_order_relaxed);
  return eval_(outcome, index);
}

std::vector<double> LikelihoodModel::row(std::size_t outcome) const {
  check_outcome(outcome);
  const std::size_t n = grid_.size();
  std::vector<double> r(n);
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < n; ++j) r[j] = eval_(outcome, j);
  evaluations_.fetch_add(n, std::memory_order_relaxed);
  return r;
}

std::vector<double> LikelihoodModel::oracle_row(std::size_t outcome) const {
  check_outcome(outcome);
  const std::size_t n = grid_.size();
  std::vector<double> r(n);
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < n; ++j) r[j] = eval_(outcome, j);
  return r;
}

void LikelihoodModel::reset_counters() const {
  evaluations_.store(0);
  oracle_calls_.store(0);
}

void LikelihoodModel::check_gamma(std::size_t outcome) const {
  check_outcome(outcome);
  const double g = gamma_[outcome];
  for (std::size_t j = 0; j < grid_.size(); ++j) {
    const double p = eval_(outcome, j);
    if (p > g * (1.0 + 1e-12))
      throw GammaViolation("likelihood '" + name_ + "': P(" + std::to_string(outcome) + "|x_" + std::to_string(j) +
                               ") = " + std::to_string(p) + " exceeds Gamma = " + std::to_string(g),
                           j);
  }
}

ExperimentControl::ExperimentControl(Eigen::VectorXd c) : components(std::move(c)) {
  if (components.size() < 1) throw std::invalid_argument("control: at least one component required");
  if (!components.allFinite()) throw std::invalid_argument("control: non-finite component");
}

ExperimentControl::ExperimentControl(std::initializer_list<double> c)
    : ExperimentControl(Eigen::Map<const Eigen::VectorXd>(c.begin(), static_cast<Eigen::Index>(c.size()))) {}

ExperimentControl ExperimentControl::shifted(Eigen::Index j, double h) const {
  Eigen::VectorXd c = components;
  c[j] += h;
  return ExperimentControl(std::move(c));
}

LikelihoodModel make_table_model(const HypothesisGrid& grid, std::vector<std::vector<double>> rows,
                                 std::optional<std::vector<double>> gamma) {
  for (const auto& r : rows) {
    if (r.size() != grid.size()) throw std::invalid_argument("table model: row length must match grid size");
    for (double p : r)
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("table model: probabilities must lie in [0,1]");
  }
  std::vector<double> g;
  if (gamma) {
    g = *gamma;
  } else {
    for (const auto& r : rows) g.push_back(std::max(1e-300, *std::max_element(r.begin(), r.end())));
  }
  auto table = std::make_shared<const std::vector<std::vector<double>>>(std::move(rows));
  const std::size_t outcomes = table->size();
  return LikelihoodModel(
      grid, outcomes, [table](std::size_t e, std::size_t j) { return (*table)[e][j]; }, std::move(g),
      std::nullopt, "table");
}

LikelihoodModel make_constant_model(const HypothesisGrid& grid, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("constant model: p must lie in [0,1]");
  return LikelihoodModel(
      grid, 2, [p](std::size_t e, std::size_t) { return e == 1 ? p : 1.0 - p; }, {1.0, 1.0}, std::nullopt,
      "constant");
}

LikelihoodModel make_uninformative_model(const HypothesisGrid& grid, std::size_t outcomes) {
  if (outcomes == 0) throw std::invalid_argument("uninformative model: need at least one outcome");
  const double p = 1.0 / static_cast<double>(outcomes);
  return LikelihoodModel(
      grid, outcomes, [p](std::size_t, std::size_t) { return p; }, std::vector<double>(outcomes, 1.0),
      std::nullopt, "uninformative");
}

LikelihoodModel make_precession_model(const HypothesisGrid& grid, double omega_minus, double t) {
  if (grid.dims() != 1) throw std::invalid_argument("precession model: one-dimensional grid required");
  if (!(t >= 0.0)) throw std::invalid_argument("precession model: t must be nonnegative");
  const auto mesh = grid.view();
  return LikelihoodModel(
      grid, 2,
      [mesh, omega_minus, t](std::size_t e, std::size_t j) {
        const double c = std::cos((mesh.coord(j, 0) - omega_minus) * t);
        const double p1 = c * c;
        return e == 1 ? p1 : 1.0 - p1;
      },
      {1.0, 1.0}, std::nullopt, "precession");
}

ControlledModel precession_family(const HypothesisGrid& grid, double omega_minus) {
  return [grid, omega_minus](const ExperimentControl& c) {
    const double om = c.size() > 1 ? c[1] : omega_minus;
    return make_precession_model(grid, om, c[0]);
  };
}

}  // namespace qbayes
