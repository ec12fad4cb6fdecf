#include "qbayes/grover_demo.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "qbayes/exact_bayes.hpp"
#include "qbayes/qsim.hpp"

namespace qbayes {

void GroverInstance::validate() const {
  if (n_items < 2 || !std::has_single_bit(n_items))
    throw std::invalid_argument("grover: n_items must be a power of two >= 2");
  if (marked.empty()) throw std::invalid_argument("grover: at least one marked item");
  std::vector<std::size_t> sorted = marked;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("grover: marked items must be distinct");
  if (sorted.back() >= n_items) throw std::invalid_argument("grover: marked item out of range");
  if (noisy && marked.size() != 1) throw std::invalid_argument("grover: the noisy variant has one marked item");
}

HypothesisGrid GroverInstance::grid() const {
  validate();
  return HypothesisGrid(1, std::countr_zero(n_items));
}

namespace {

LikelihoodModel two_level(const GroverInstance& instance, double hit, double miss) {
  const HypothesisGrid grid = instance.grid();
  std::vector<double> p1(instance.n_items, miss);
  for (std::size_t m : instance.marked) p1[m] = hit;
  std::vector<double> p0(p1.size());
  std::transform(p1.begin(), p1.end(), p0.begin(), [](double v) { return 1.0 - v; });
  return make_table_model(grid, {std::move(p0), std::move(p1)}, std::vector<double>{1.0, 1.0});
}

}  // namespace

LikelihoodModel grover_model(const GroverInstance& instance) { return two_level(instance, 1.0, 0.0); }

LikelihoodModel noisy_grover_model(const GroverInstance& instance) {
  return two_level(instance, 2.0 / 3.0, 1.0 / 3.0);
}

GroverResult grover_via_bayes(const GroverInstance& instance) {
  if (instance.noisy) throw std::invalid_argument("grover_via_bayes: instance must not be noisy");
  const LikelihoodModel model = grover_model(instance);
  const auto prior = DiscreteDistribution::uniform(instance.grid());
  DiscreteDistribution post = bayes_update(prior, model, 1);
  return {std::move(post), model.queries()};
}

double doubling_step(double p) { return 2.0 * p / (1.0 + p); }

NoisyGroverTrace noisy_grover_inference(const GroverInstance& instance, Rng& rng, double target,
                                        std::size_t max_updates) {
  if (!instance.noisy) throw std::invalid_argument("noisy_grover_inference: instance must be noisy");
  const LikelihoodModel model = noisy_grover_model(instance);
  const std::size_t xm = instance.marked.front();
  DiscreteDistribution belief = DiscreteDistribution::uniform(instance.grid());
  NoisyGroverTrace trace;
  trace.marked_probability.push_back(belief[xm]);
  const std::size_t pretend = 1;
  while (belief[xm] < target && trace.updates < max_updates) {
    const QuantumState heralded = coherent_update(prepare_state(belief), model, {&pretend, 1});
    trace.herald_probability.push_back(herald_success_probability(heralded));
    trace.herald_bits.push_back(measure_herald(heralded, rng).success ? 1 : 0);
    belief = bayes_update(belief, model, pretend);
    trace.marked_probability.push_back(belief[xm]);
    ++trace.updates;
  }
  return trace;
}

}  // namespace qbayes
