#include "qbayes/harness.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

#include "qbayes/amp.hpp"
#include "qbayes/errors.hpp"
#include "qbayes/exact_bayes.hpp"
#include "qbayes/expdesign.hpp"
#include "qbayes/filtering.hpp"
#include "qbayes/grover_demo.hpp"
#include "qbayes/kernels.hpp"
#include "qbayes/mesh.hpp"
#include "qbayes/qsim.hpp"
#include "qbayes/repcode.hpp"
#include "qbayes/semiclassical.hpp"

namespace qbayes {

using nlohmann::json;

namespace {

constexpr double kHuge = std::numeric_limits<double>::max();

const std::vector<std::pair<Experiment, const char*>>& names() {
  static const std::vector<std::pair<Experiment, const char*>> table = {
      {Experiment::grover, "grover"},       {Experiment::noisy_grover, "noisy-grover"},
      {Experiment::stability, "stability"}, {Experiment::semiclassical, "semiclassical"},
      {Experiment::scaling, "scaling"},     {Experiment::expdesign, "expdesign"},
      {Experiment::filtering, "filtering"}, {Experiment::repcode, "repcode"},
      {Experiment::discretize, "discretize"}};
  return table;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Typed access to the experiment's parameter table; remembers resolved
// values and rejects keys nobody asked for.
class Params {
 public:
  Params(const json& table, std::string experiment) : table_(table), experiment_(std::move(experiment)) {
    if (!table_.is_object()) throw ConfigError("model: expected a table");
  }

  double num(const std::string& key, double def) {
    const json* v = take(key);
    double out = def;
    if (v) {
      if (!v->is_number()) throw ConfigError("model." + key + ": expected a number");
      out = v->get<double>();
    }
    resolved_[key] = out;
    return out;
  }

  long integer(const std::string& key, long def) {
    const json* v = take(key);
    long out = def;
    if (v) {
      if (!v->is_number_integer()) throw ConfigError("model." + key + ": expected an integer");
      out = v->get<long>();
    }
    resolved_[key] = out;
    return out;
  }

  std::vector<double> nums(const std::string& key, std::vector<double> def) {
    const json* v = take(key);
    if (v) {
      if (!v->is_array() || v->empty()) throw ConfigError("model." + key + ": expected a non-empty list of numbers");
      def.clear();
      for (const auto& e : *v) {
        if (!e.is_number()) throw ConfigError("model." + key + ": expected a non-empty list of numbers");
        def.push_back(e.get<double>());
      }
    }
    resolved_[key] = def;
    return def;
  }

  std::vector<long> ints(const std::string& key, std::vector<long> def) {
    const json* v = take(key);
    if (v) {
      if (!v->is_array()) throw ConfigError("model." + key + ": expected a list of integers");
      def.clear();
      for (const auto& e : *v) {
        if (!e.is_number_integer()) throw ConfigError("model." + key + ": expected a list of integers");
        def.push_back(e.get<long>());
      }
    }
    resolved_[key] = def;
    return def;
  }

  void require(bool ok, const std::string& key, const std::string& what) const {
    if (!ok) throw ConfigError("model." + key + ": " + what);
  }

  void finish() const {
    for (const auto& item : table_.items())
      if (!seen_.count(item.key()))
        throw ConfigError("model." + item.key() + ": unknown parameter for experiment " + experiment_);
  }

  const json& resolved() const { return resolved_; }

 private:
  const json* take(const std::string& key) {
    seen_.insert(key);
    auto it = table_.find(key);
    return it == table_.end() ? nullptr : &*it;
  }

  const json& table_;
  std::string experiment_;
  std::set<std::string> seen_;
  json resolved_ = json::object();
};

class Sink {
 public:
  Sink(std::string scenario, std::uint64_t seed, int trial, bool timing)
      : scenario_(std::move(scenario)), seed_(seed), trial_(trial), timing_(timing),
        last_(std::chrono::steady_clock::now()) {}

  void add(const std::string& metric, double value, std::uint64_t queries = 0) {
    double ms = 0.0;
    if (timing_) {
      const auto now = std::chrono::steady_clock::now();
      ms = std::chrono::duration<double, std::milli>(now - last_).count();
      last_ = now;
    }
    rows.push_back({scenario_, seed_, trial_, metric, value, queries, ms});
  }

  std::vector<ReportRow> rows;

 private:
  std::string scenario_;
  std::uint64_t seed_;
  int trial_;
  bool timing_;
  std::chrono::steady_clock::time_point last_;
};

struct Scenario {
  int trials = 1;
  std::pair<int, int> grid{1, 1};
  std::vector<double> epsilon;
  json params = json::object();
  std::vector<Check> checks;
  // Shared work done once before the trials; its rows are reported under trial 0.
  std::function<void(Sink&)> setup = [](Sink&) {};
  std::function<void(int, const Rng&, Sink&)> trial;
};

Check all_in(std::string metric, int criterion, double lo, double hi) {
  return {std::move(metric), criterion, Check::all_in, lo, hi};
}
Check mean_in(std::string metric, int criterion, double lo, double hi) {
  return {std::move(metric), criterion, Check::mean_in, lo, hi};
}

std::string tag(const std::string& key, double v) {
  std::ostringstream os;
  os << key << '=' << v;
  return os.str();
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

std::vector<double> random_weights(Rng& rng, std::size_t n, double floor = 0.05) {
  std::vector<double> w(n);
  double total = 0.0;
  for (auto& v : w) total += (v = rng.uniform() + floor);
  for (auto& v : w) v /= total;
  return w;
}

// grover: exact reduction, update-channel identities, L-update decay ----------

Scenario grover_scenario(Params& p, const std::pair<int, int>& grid) {
  Scenario s;
  const std::size_t n_items = std::size_t{1} << grid.second;
  const auto marked_l = p.ints("marked", {3, 17, 40, 58});
  const long instances = p.integer("instances", 200);
  const long max_updates = p.integer("max_updates", 20);
  const double decay_p = p.num("p", 0.7);
  p.require(instances >= 0, "instances", "must be >= 0");
  p.require(max_updates >= 1 && max_updates <= 22, "max_updates", "must lie in [1, 22]");
  p.require(decay_p >= 0.0 && decay_p <= 1.0, "p", "must lie in [0, 1]");
  GroverInstance inst{n_items, {}, false};
  for (long m : marked_l) {
    p.require(m >= 0 && static_cast<std::size_t>(m) < n_items, "marked", "index outside the grid");
    inst.marked.push_back(static_cast<std::size_t>(m));
  }
  p.require(!inst.marked.empty(), "marked", "at least one item required");

  s.checks = {all_in("c1.max_abs_error", 1, 0.0, 1e-12),
              all_in("c1.query_count", 1, static_cast<double>(n_items), static_cast<double>(n_items)),
              all_in("c3.max_posterior_error", 3, 0.0, 1e-12), all_in("c3.max_herald_error", 3, 0.0, 1e-12),
              all_in("c4.max_decay_error", 4, 0.0, 1e-12)};

  s.trial = [=](int, const Rng& rng, Sink& out) {
    const GroverResult res = grover_via_bayes(inst);
    std::set<std::size_t> marked(inst.marked.begin(), inst.marked.end());
    const double target = 1.0 / static_cast<double>(marked.size());
    double err = 0.0;
    for (std::size_t j = 0; j < n_items; ++j)
      err = std::max(err, std::abs(res.posterior[j] - (marked.count(j) ? target : 0.0)));
    out.add("c1.max_abs_error", err, res.queries);
    out.add("c1.query_count", static_cast<double>(res.queries), res.queries);

    double post_err = 0.0, herald_err = 0.0;
    std::uint64_t oracle = 0;
    for (long i = 0; i < instances; ++i) {
      Rng r = rng.split({stream_id::kPrior, static_cast<std::uint64_t>(i)});
      const HypothesisGrid g(1, 1 + static_cast<int>(r.below(5)));
      const std::size_t outcomes = 2 + r.below(2);
      const std::vector<double> prior_w = random_weights(r, g.size());
      std::vector<std::vector<double>> rows(outcomes, std::vector<double>(g.size()));
      for (std::size_t j = 0; j < g.size(); ++j) {
        double total = 0.0;
        for (std::size_t d = 0; d < outcomes; ++d) total += (rows[d][j] = r.uniform() + 0.01);
        for (std::size_t d = 0; d < outcomes; ++d) rows[d][j] /= total;
      }
      std::vector<double> gamma(outcomes);
      for (std::size_t d = 0; d < outcomes; ++d)
      {
        const double top = *std::max_element(rows[d].begin(), rows[d].end());
        gamma[d] = top + (1.0 - top) * r.uniform();
      }
      const std::size_t e = r.below(outcomes);

      double evidence = 0.0;
      std::vector<double> expect(g.size());
      for (std::size_t j = 0; j < g.size(); ++j) evidence += (expect[j] = prior_w[j] * rows[e][j]);
      for (auto& v : expect) v /= evidence;

      const LikelihoodModel model = make_table_model(g, rows, gamma);
      const DiscreteDistribution prior(g, prior_w);
      const std::size_t ev[] = {e};
      const QuantumState h = coherent_update(prepare_state(prior), model, ev);
      const auto ok = all_heralds_one(h);
      const double ph = h.probability(ok);
      const auto post = h.condition(ok, h.registers_of_kind(RegisterKind::herald)).hypothesis_marginal();
      post_err = std::max(post_err, max_abs_diff(post.weights(), expect));
      herald_err = std::max(herald_err, std::abs(ph - evidence / gamma[e]));
      oracle += model.oracle_queries();
    }
    out.add("c3.max_posterior_error", post_err, oracle);
    out.add("c3.max_herald_error", herald_err, 0);

    const HypothesisGrid g1(1, 1);
    const LikelihoodModel constant = make_constant_model(g1, decay_p);
    const QuantumState start = prepare_state(DiscreteDistribution::uniform(g1));
    double decay_err = 0.0;
    for (long L = 1; L <= max_updates; ++L) {
      const std::vector<std::size_t> ones(static_cast<std::size_t>(L), 1);
      const double ph = herald_success_probability(coherent_update(start, constant, ones));
      decay_err = std::max(decay_err, std::abs(ph - std::pow(decay_p, static_cast<double>(L))));
    }
    out.add("c4.max_decay_error", decay_err, constant.oracle_queries());
  };
  return s;
}

// noisy-grover: posterior doubling -------------------------------------------

Scenario noisy_grover_scenario(Params& p, const std::pair<int, int>& grid) {
  Scenario s;
  const std::size_t n_items = std::size_t{1} << grid.second;
  const long marked = p.integer("marked", 7);
  const double target = p.num("target", 0.5);
  p.require(marked >= 0 && static_cast<std::size_t>(marked) < n_items, "marked", "index outside the grid");
  p.require(target > 0.0 && target < 1.0, "target", "must lie in (0, 1)");
  const double nd = static_cast<double>(n_items);
  // Odds double each step: P_k = 2^k / (N - 1 + 2^k).
  const double bound = std::ceil(std::log2(nd)) + 1.0;
  s.checks = {all_in("c2.updates", 2, 0.0, bound),
              all_in("c2.max_trace_error", 2, 0.0, 1e-12),
              all_in("c2.herald_min", 2, 1.0 / 3.0 - 1e-12, 2.0 / 3.0 + 1e-12),
              all_in("c2.herald_max", 2, 1.0 / 3.0 - 1e-12, 2.0 / 3.0 + 1e-12),
              all_in("c2.herald_monotone", 2, 1.0, 1.0),
              all_in("c2.reached", 2, 1.0, 1.0)};
  s.trial = [=](int, const Rng& rng, Sink& out) {
    GroverInstance inst{n_items, {static_cast<std::size_t>(marked)}, true};
    Rng r = rng.split({stream_id::kHerald});
    const NoisyGroverTrace tr = noisy_grover_inference(inst, r, target);
    double err = 0.0;
    for (std::size_t k = 0; k < tr.marked_probability.size(); ++k) {
      const double pk = std::ldexp(1.0, static_cast<int>(k)) / (nd - 1.0 + std::ldexp(1.0, static_cast<int>(k)));
      err = std::max(err, std::abs(tr.marked_probability[k] - pk));
    }
    double lo = 1.0, hi = 0.0;
    bool monotone = true;
    for (std::size_t k = 0; k < tr.herald_probability.size(); ++k) {
      lo = std::min(lo, tr.herald_probability[k]);
      hi = std::max(hi, tr.herald_probability[k]);
      if (k > 0 && tr.herald_probability[k] < tr.herald_probability[k - 1]) monotone = false;
    }
    out.add("c2.updates", static_cast<double>(tr.updates), tr.updates);
    out.add("c2.max_trace_error", err);
    out.add("c2.herald_min", lo);
    out.add("c2.herald_max", hi);
    out.add("c2.herald_monotone", monotone ? 1.0 : 0.0);
    out.add("c2.reached", tr.marked_probability.back() >= target ? 1.0 : 0.0);
    double successes = 0.0;
    for (int b : tr.herald_bits) successes += b;
    out.add("c2.herald_success_rate", tr.herald_bits.empty() ? 0.0 : successes / tr.herald_bits.size());
  };
  return s;
}

// stability: contraction of the traced-out update channel ---------------------

Scenario stability_scenario(Params& p, const std::pair<int, int>& grid) {
  Scenario s;
  const double delta = p.num("delta", 0.05);
  const double tol = p.num("tolerance", 1e-6);
  const double p_hi = p.num("two_state_high", 0.9);
  const double p_lo = p.num("two_state_low", 0.1);
  const long steps2 = p.integer("two_state_steps", 10);
  p.require(delta > 0.0 && delta < 1.0, "delta", "must lie in (0, 1)");
  p.require(tol > 0.0, "tolerance", "must be positive");
  p.require(p_hi >= 0.0 && p_hi <= 1.0 && p_lo >= 0.0 && p_lo <= 1.0, "two_state_high", "likelihoods lie in [0, 1]");
  p.require(steps2 >= 1, "two_state_steps", "must be >= 1");
  const int bits = grid.second;
  s.checks = {all_in("c8.two_state_ratio_error", 8, 0.0, 1e-10), all_in("c8.within_prediction", 8, 1.0, 1.0),
              all_in("c8.monotone", 8, 1.0, 1.0)};
  s.trial = [=](int, const Rng& rng, Sink& out) {
    {
      const HypothesisGrid g(1, 1);
      const LikelihoodModel model = make_table_model(g, {{1 - p_hi, 1 - p_lo}, {p_hi, p_lo}}, std::vector<double>{1, 1});
      const cplx amps[] = {std::cos(0.4), std::sin(0.4)};
      const std::size_t sched[] = {1};
      const StabilityTrace tr = stability_iterate(DensityState::pure(amps), model, sched, steps2, 0);
      const double c = coherence_factor(p_hi, p_lo);
      double err = 0.0;
      for (std::size_t k = 1; k < tr.distance.size(); ++k)
        err = std::max(err, std::abs(tr.distance[k] / tr.distance[k - 1] - c));
      out.add("c8.two_state_ratio_error", err);
    }
    const HypothesisGrid g(1, bits);
    const std::size_t n = g.size();
    Rng r = rng.split({stream_id::kPrior});
    // Spread likelihoods keep the slowest pair contraction away from 1.
    std::vector<double> lik(n);
    for (std::size_t j = 0; j < n; ++j)
      lik[j] = 0.05 + 0.9 * (static_cast<double>(j) + 0.5 * r.uniform()) / static_cast<double>(n);
    for (std::size_t j = n - 1; j > 0; --j) std::swap(lik[j], lik[r.below(j + 1)]);
    std::vector<double> miss(n);
    for (std::size_t j = 0; j < n; ++j) miss[j] = 1.0 - lik[j];
    const LikelihoodModel model = make_table_model(g, {miss, lik}, std::vector<double>{1, 1});
    const std::size_t target = r.below(n);
    std::vector<double> a(n, 0.0);
    double norm = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != target) norm += (a[j] = r.normal()) * a[j];
    for (auto& v : a) v /= std::sqrt(norm);
    const DensityState init = perturbed_basis_state(n, target, delta, a);

    double c_max = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = j + 1; k < n; ++k) c_max = std::max(c_max, coherence_factor(lik[j], lik[k]));
    const double predicted = std::ceil(std::log(delta / tol) / std::log(1.0 / c_max));
    const std::size_t sched[] = {1, 0};
    const StabilityTrace tr = stability_iterate(init, model, sched, static_cast<std::size_t>(predicted) + 10, target);
    std::size_t reached = tr.distance.size();
    bool monotone = true;
    for (std::size_t k = 0; k < tr.distance.size(); ++k) {
      if (reached == tr.distance.size() && tr.distance[k] <= tol) reached = k;
      if (k > 0 && tr.distance[k] > tr.distance[k - 1] + 1e-15) monotone = false;
    }
    out.add("c8.c_max", tr.c_max);
    out.add("c8.c_max_from_likelihoods", c_max);
    out.add("c8.initial_distance", tr.distance.front());
    out.add("c8.predicted_steps", predicted);
    out.add("c8.steps_to_tolerance", reached == tr.distance.size() ? std::nan("") : static_cast<double>(reached));
    out.add("c8.within_prediction", static_cast<double>(reached) <= predicted ? 1.0 : 0.0);
    out.add("c8.monotone", monotone ? 1.0 : 0.0);
    out.add("c8.final_target_distance", tr.target_distance.back());
  };
  return s;
}

// semiclassical: moments of a batched precession posterior ---------------------

struct SemiSetup {
  HypothesisGrid grid{1, 8};
  double omega = 0.7;
  double omega_minus = 0.0;
  std::vector<double> times;
  double mu = 0.5;
  double sigma = 0.15;
};

struct SemiRun {
  double mean_error = 0.0;
  double var_error = 0.0;
  std::uint64_t queries = 0;
  bool clipped = false;
  std::uint64_t baseline_queries = 0;
};

SemiSetup semi_setup(Params& p, const std::pair<int, int>& grid) {
  SemiSetup s;
  s.grid = HypothesisGrid(1, grid.second);
  s.omega = p.num("omega", 0.7);
  s.omega_minus = p.num("omega_minus", 0.0);
  s.times = p.nums("times", {1.0, 2.0, 3.0});
  s.mu = p.num("prior_mu", 0.5);
  s.sigma = p.num("prior_sigma", 0.15);
  p.require(s.sigma > 0.0, "prior_sigma", "must be positive");
  for (double t : s.times) p.require(t >= 0.0, "times", "must be >= 0");
  return s;
}

SemiRun semi_run(const SemiSetup& s, double eps, const Rng& rng, bool baseline) {
  Eigen::VectorXd mu(1);
  mu << s.mu;
  Eigen::MatrixXd cov(1, 1);
  cov << s.sigma * s.sigma;
  const DiscreteDistribution prior = discretize_gaussian(s.grid, mu, cov);
  const ControlledModel family = precession_family(s.grid, s.omega_minus);
  Rng ev = rng.split({stream_id::kEvidence});
  std::vector<Observation> obs;
  for (double t : s.times) {
    const double p1 = precession_likelihood(s.omega, s.omega_minus, t).first;
    obs.push_back({ExperimentControl{t}, ev.uniform() < p1 ? std::size_t{1} : std::size_t{0}});
  }
  const LikelihoodModel model = batch_model(family, obs);
  const LikelihoodModel oracle = model;
  const LikelihoodModel classical = model;
  std::vector<std::size_t> e(obs.size());
  std::iota(e.begin(), e.end(), std::size_t{0});
  const Moments exact = moments(sequential_update(prior, oracle, e));

  Rng est = rng.split({stream_id::kEstimation});
  const PosteriorSummary sm = semiclassical_update(prior, model, e, eps, est);
  SemiRun r;
  r.mean_error = std::abs(sm.mean[0] - exact.mean[0]);
  r.var_error = std::abs(sm.cov(0, 0) - exact.cov(0, 0));
  r.queries = sm.queries;
  r.clipped = sm.clipped;
  if (baseline) {
    Rng br = rng.split({stream_id::kBaseline});
    r.baseline_queries = classical_moment_baseline(prior, classical, e, make_moment_spec(prior, {0}), eps, br).queries;
  }
  return r;
}

Scenario semiclassical_scenario(Params& p, const std::pair<int, int>& grid, const std::vector<double>& eps_list) {
  Scenario s;
  const SemiSetup setup = semi_setup(p, grid);
  const double eps = eps_list.front();
  s.checks = {mean_in("c7.within", 7, 0.8, 1.0)};
  s.trial = [=](int, const Rng& rng, Sink& out) {
    try {
      const SemiRun r = semi_run(setup, eps, rng, false);
      out.add("c7.mean_error", r.mean_error);
      out.add("c7.var_error", r.var_error);
      out.add("c7.clipped", r.clipped ? 1.0 : 0.0);
      out.add("c7.within", r.mean_error <= eps && r.var_error <= eps ? 1.0 : 0.0, r.queries);
    } catch (const BatchTooImprobable&) {
      out.add("c7.within", 0.0);
      throw;
    }
  };
  return s;
}

// scaling: estimation bounds, amplified estimation, query slopes ---------------

Scenario scaling_scenario(Params& p, const std::pair<int, int>& grid, const std::vector<double>& ladder) {
  Scenario s;
  const auto ae_a = p.nums("ae_a", {0.1, 0.25, 0.5});
  const long ae_bits = p.integer("ae_bits", 8);
  const long ae_trials = p.integer("ae_trials", 1000);
  const long roundtrips = p.integer("roundtrips", 100);
  const double a0 = p.num("a0", 0.01);
  const long amp_instances = p.integer("amp_instances", 300);
  const auto amp_ladder = p.nums("amp_ladder", {1e-3, 5e-4, 2e-4, 1e-4});
  const long amp_reps = p.integer("amp_repetitions", 11);
  const long max_bits = p.integer("amp_max_bits", 15);
  const long slope_seeds = p.integer("slope_seeds", 20);
  const SemiSetup semi = semi_setup(p, grid);
  p.require(ae_bits >= 1 && ae_bits <= 20, "ae_bits", "must lie in [1, 20]");
  p.require(ae_trials >= 1, "ae_trials", "must be >= 1");
  p.require(a0 > 0.0 && a0 < 0.5, "a0", "must lie in (0, 0.5)");
  p.require(amp_instances >= 10, "amp_instances", "must be >= 10");
  p.require(amp_reps >= 1 && amp_reps % 2 == 1, "amp_repetitions", "must be odd");
  p.require(max_bits >= 1 && max_bits <= 20, "amp_max_bits", "must lie in [1, 20]");
  p.require(slope_seeds >= 1, "slope_seeds", "must be >= 1");
  p.require(ladder.size() >= 2, "epsilon", "the scaling ladder needs at least two values");

  for (double a : ae_a) s.checks.push_back(mean_in(tag("c5.fraction_within.a", a), 5, 0.78, 1.0));
  s.checks.push_back(all_in("c6.roundtrip_max_error", 6, 0.0, 1e-10));
  s.checks.push_back(all_in("c6.cost_ratio", 6, std::sqrt(a0) / 2.0, 2.0 * std::sqrt(a0)));
  s.checks.push_back(all_in("c7.query_slope", 7, 0.8, 1.2));
  s.checks.push_back(all_in("c7.baseline_slope", 7, 1.6, kHuge));

  s.trial = [=](int, const Rng& rng, Sink& out) {
    for (std::size_t ai = 0; ai < ae_a.size(); ++ai) {
      const double a = ae_a[ai];
      const BranchState b = branch_from_probability(a);
      const double bound = estimation_error_bound(a, static_cast<int>(ae_bits));
      long hits = 0;
      std::uint64_t calls = 0;
      for (long i = 0; i < ae_trials; ++i) {
        Rng r = rng.split({stream_id::kEstimation, ai, static_cast<std::uint64_t>(i)});
        const EstimationOutcome o = amplitude_estimate(b, static_cast<int>(ae_bits), 1, r);
        calls += o.unitary_calls;
        if (std::abs(o.estimate - a) <= bound) ++hits;
      }
      out.add(tag("c5.fraction_within.a", a), static_cast<double>(hits) / static_cast<double>(ae_trials), calls);
    }

    Rng rt = rng.split({stream_id::kPrior, 0});
    double rt_err = 0.0;
    for (long i = 0; i < roundtrips; ++i) {
      const double a = 1e-4 + (0.5 - 1e-4) * rt.uniform();
      const BranchState b = branch_from_probability(a);
      const int m_max = static_cast<int>(std::floor((std::numbers::pi / (2.0 * b.theta) - 1.0) / 2.0));
      const int m = static_cast<int>(rt.below(static_cast<std::uint64_t>(m_max) + 1));
      rt_err = std::max(rt_err, std::abs(invert_amplified(grover_power(b, m).a, m) - a));
    }
    out.add("c6.roundtrip_max_error", rt_err);

    // Matched empirical error: the 90th-percentile error over random a in (0, a0].
    const int m = amplification_rounds(a0);
    Rng ar = rng.split({stream_id::kPrior, 1});
    std::vector<double> as(static_cast<std::size_t>(amp_instances));
    for (auto& a : as) a = a0 * (0.05 + 0.95 * ar.uniform());
    const std::size_t q = as.size() * 9 / 10;
    std::vector<double> err_plain(max_bits + 1), err_amp(max_bits + 1);
    std::vector<std::uint64_t> cost_plain(max_bits + 1), cost_amp(max_bits + 1);
    for (int t = 1; t <= max_bits; ++t) {
      std::vector<double> ep, ea;
      for (std::size_t i = 0; i < as.size(); ++i) {
        const BranchState b = branch_from_probability(as[i]);
        Rng r1 = rng.split({stream_id::kEstimation, 100, static_cast<std::uint64_t>(t), i});
        const EstimationOutcome o1 = amplitude_estimate(b, t, static_cast<int>(amp_reps), r1);
        Rng r2 = rng.split({stream_id::kEstimation, 200, static_cast<std::uint64_t>(t), i});
        const EstimationOutcome o2 = amplitude_estimate(grover_power(b, m), t, static_cast<int>(amp_reps), r2);
        ep.push_back(std::abs(o1.estimate - as[i]));
        ea.push_back(std::abs(invert_amplified(o2.estimate, m) - as[i]));
        cost_plain[t] = o1.grover_applications;
        cost_amp[t] = o2.grover_applications * static_cast<std::uint64_t>(2 * m + 1);
      }
      std::nth_element(ep.begin(), ep.begin() + q, ep.end());
      std::nth_element(ea.begin(), ea.begin() + q, ea.end());
      err_plain[t] = ep[q];
      err_amp[t] = ea[q];
    }
    double log_sum = 0.0, log_cal = 0.0;
    bool complete = true;
    Rng cal = rng.split({stream_id::kEstimation, 300});
    for (double eps : amp_ladder) {
      int tp = 0, ta = 0;
      for (int t = 1; t <= max_bits; ++t) {
        if (!tp && err_plain[t] <= eps) tp = t;
        if (!ta && err_amp[t] <= eps) ta = t;
      }
      double ratio = std::nan("");
      if (tp && ta) ratio = static_cast<double>(cost_amp[ta]) / static_cast<double>(cost_plain[tp]);
      else complete = false;
      out.add(tag("c6.cost_ratio.eps", eps), ratio, tp && ta ? cost_amp[ta] + cost_plain[tp] : 0);
      log_sum += std::log(ratio);

      // Worst-case calibrated comparison: plain sized by its error bound at a = 1/2.
      const int t_cal = bits_for_error(eps, 0.5);
      const double plain_cal = std::ldexp(1.0, t_cal) - 1.0;
      const EstimationOutcome amp_cal = prior_amplified_estimate(branch_from_probability(a0 / 2), a0, eps, cal, 1);
      log_cal += std::log(static_cast<double>(amp_cal.grover_applications) / plain_cal);
    }
    const double n_eps = static_cast<double>(amp_ladder.size());
    out.add("c6.cost_ratio", complete ? std::exp(log_sum / n_eps) : std::nan(""));
    out.add("c6.predicted_ratio", std::sqrt(a0));
    out.add("c6.calibrated_cost_ratio", std::exp(log_cal / n_eps));

    std::vector<double> lx, lq, lb;
    for (std::size_t ei = 0; ei < ladder.size(); ++ei) {
      double qs = 0.0, bs = 0.0;
      std::uint64_t total = 0;
      for (long k = 0; k < slope_seeds; ++k) {
        const SemiRun r = semi_run(semi, ladder[ei], rng.split({stream_id::kMoment, ei, static_cast<std::uint64_t>(k)}), true);
        qs += static_cast<double>(r.queries);
        bs += static_cast<double>(r.baseline_queries);
        total += r.queries;
      }
      qs /= static_cast<double>(slope_seeds);
      bs /= static_cast<double>(slope_seeds);
      out.add(tag("c7.mean_queries.eps", ladder[ei]), qs, total);
      out.add(tag("c7.mean_baseline_queries.eps", ladder[ei]), bs);
      lx.push_back(std::log(1.0 / ladder[ei]));
      lq.push_back(std::log(qs));
      lb.push_back(std::log(bs));
    }
    out.add("c7.query_slope", log_slope(lx, lq));
    out.add("c7.baseline_slope", log_slope(lx, lb));
  };
  return s;
}

// expdesign: injection identity, gradient sign, ascent ------------------------

Scenario expdesign_scenario(Params& p, const std::pair<int, int>& grid, const std::vector<double>& eps_list) {
  Scenario s;
  const double omega_minus = p.num("omega_minus", 0.0);
  const double t0 = p.num("t", 1.0);
  const long steps = p.integer("steps", 20);
  const double rate = p.num("rate", 5.0);
  const double lo = p.num("t_min", 0.0);
  const double hi = p.num("t_max", 4.0);
  const double m3_in = p.num("m3", 0.0);
  const double injection_eps = p.num("injection_epsilon", 1e-9);
  p.require(steps >= 1, "steps", "must be >= 1");
  p.require(rate > 0.0, "rate", "must be positive");
  p.require(lo >= 0.0 && hi > lo, "t_max", "need 0 <= t_min < t_max");
  p.require(t0 >= lo && t0 <= hi, "t", "must lie in [t_min, t_max]");
  p.require(m3_in >= 0.0, "m3", "must be >= 0 (0 = estimate)");
  const double eps = eps_list.front();
  const HypothesisGrid g(1, grid.second);
  s.checks = {all_in("c12.injection_error", 12, 0.0, 1e-12), mean_in("c12.sign_match", 12, 0.9, 1.0),
              mean_in("c12.risk_reduced", 12, 0.7, 1.0)};
  auto m3 = std::make_shared<double>(m3_in);
  s.setup = [=](Sink& out) {
    if (*m3 == 0.0)
      *m3 = estimate_m3(DiscreteDistribution::uniform(g), precession_family(g, omega_minus), ExperimentControl{lo},
                        ExperimentControl{hi});
    out.add("c12.m3", *m3);
  };
  s.trial = [=](int, const Rng& rng, Sink& out) {
    {
      Rng r = rng.split({stream_id::kPrior});
      const int dims = 1 + static_cast<int>(r.below(2));
      const HypothesisGrid gi(dims, dims == 1 ? 2 + static_cast<int>(r.below(4)) : 1 + static_cast<int>(r.below(3)));
      const std::size_t outcomes = 2 + r.below(3);
      const DiscreteDistribution prior(gi, random_weights(r, gi.size()));
      std::vector<std::vector<double>> rows(outcomes, std::vector<double>(gi.size()));
      for (std::size_t j = 0; j < gi.size(); ++j) {
        double total = 0.0;
        for (std::size_t d = 0; d < outcomes; ++d) total += (rows[d][j] = r.uniform() + 0.05);
        for (std::size_t d = 0; d < outcomes; ++d) rows[d][j] /= total;
      }
      const LikelihoodModel model = make_table_model(gi, rows);
      const LikelihoodModel oracle = model;
      Rng u = rng.split({stream_id::kUtility});
      const UtilityEstimate est = utility_quantum(prior, model, injection_eps, u, {EstimatorKind::exact});
      out.add("c12.injection_error", std::abs(est.value - utility_exact(prior, oracle).value), est.oracle_queries);
    }
    const DiscreteDistribution prior = DiscreteDistribution::uniform(g);
    const ControlledModel family = precession_family(g, omega_minus);
    Rng gr = rng.split({stream_id::kGradient});
    const GradientEstimate ge = gradient_quantum(prior, family, ExperimentControl{t0}, eps, *m3, gr);
    const double exact = gradient_exact(prior, family, ExperimentControl{t0})[0];
    out.add("c12.gradient_error", std::abs(ge.value[0] - exact));
    out.add("c12.sign_match", (ge.value[0] > 0) == (exact > 0) ? 1.0 : 0.0, ge.oracle_queries);
    Rng ar = rng.split({stream_id::kEstimation});
    const AscentResult asc = design_ascent(prior, family, ExperimentControl{t0}, static_cast<int>(steps), rate, eps,
                                           *m3, ar, ExperimentControl{lo}, ExperimentControl{hi});
    const double ratio = asc.risk.back() / asc.risk.front();
    out.add("c12.risk_ratio", ratio);
    out.add("c12.final_control", asc.control[0]);
    out.add("c12.risk_reduced", ratio <= 0.8 ? 1.0 : 0.0, asc.oracle_queries);
  };
  return s;
}

// filtering: amplitude-domain convolution and tracking ------------------------

Scenario filtering_scenario(Params& p, const std::pair<int, int>& grid) {
  Scenario s;
  TrackingConfig tc;
  tc.bits = grid.second;
  tc.steps = static_cast<int>(p.integer("steps", tc.steps));
  tc.burn_in = static_cast<int>(p.integer("burn_in", tc.burn_in));
  tc.start = p.num("start", tc.start);
  tc.start_sigma = p.num("start_sigma", tc.start_sigma);
  tc.drift_sigma = p.num("drift_sigma", tc.drift_sigma);
  tc.kernel_sigma = p.num("kernel_sigma", tc.kernel_sigma);
  tc.contrast = p.num("contrast", tc.contrast);
  const long instances = p.integer("closed_form_instances", 20);
  const double width = p.num("spread_sigma", 0.02);
  p.require(tc.steps > tc.burn_in && tc.burn_in >= 0, "steps", "must exceed burn_in");
  p.require(tc.kernel_sigma > 0.0, "kernel_sigma", "must be positive");
  p.require(width > 0.0, "spread_sigma", "must be positive");
  const HypothesisGrid g(1, grid.second);
  s.checks = {all_in("c10.delta_identity_error", 10, 0.0, 1e-10), all_in("c10.closed_form_error", 10, 0.0, 1e-10),
              all_in("c10.herald_probability_error", 10, 0.0, 1e-12), all_in("c10.steady_ratio", 10, 0.5, 2.0)};
  s.trial = [=](int, const Rng& rng, Sink& out) {
    const std::size_t n = g.size();
    Rng r = rng.split({stream_id::kPrior});
    auto random_prior = [&] {
      Eigen::VectorXd mu(1);
      mu << 0.3 + 0.4 * r.uniform();
      Eigen::MatrixXd cov(1, 1);
      const double sd = 0.02 + 0.08 * r.uniform();
      cov << sd * sd;
      return discretize_gaussian(g, mu, cov);
    };
    double delta_err = 0.0, form_err = 0.0, herald_err = 0.0;
    for (long i = 0; i < instances; ++i) {
      const DiscreteDistribution prior = random_prior();
      const QuantumState psi = prepare_state(prior);
      const FilterOutcome id = filter_success_branch(psi, delta_kernel(n));
      for (std::size_t j = 0; j < n; ++j)
        delta_err = std::max(delta_err, std::abs(id.post.amplitudes()[j] - psi.amplitudes()[j]));

      const ConvolutionKernel kernel = wrapped_gaussian_kernel(n, 0.005 + 0.045 * r.uniform());
      const FilterOutcome f = filter_success_branch(psi, kernel);
      std::vector<cplx> v(n), spec(n), back(n);
      for (std::size_t j = 0; j < n; ++j) v[j] = std::sqrt(prior[j]);
      kernels::ref::dft(v, spec, +1);
      double expected_p = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        expected_p += std::norm(spec[k]) / static_cast<double>(n) * kernel.q_hat[k] / kernel.gamma;
        spec[k] *= std::sqrt(std::max(kernel.q_hat[k], 0.0));
      }
      kernels::ref::dft(spec, back, -1);
      double norm = 0.0;
      for (const auto& b : back) norm += std::norm(b);
      norm = std::sqrt(norm);
      for (std::size_t j = 0; j < n; ++j)
        form_err = std::max(form_err, std::abs(f.post.amplitudes()[j] - back[j] / norm));
      herald_err = std::max(herald_err, std::abs(f.success_probability - expected_p));
    }
    out.add("c10.delta_identity_error", delta_err);
    out.add("c10.closed_form_error", form_err);
    out.add("c10.herald_probability_error", herald_err);

    {
      Eigen::VectorXd mu(1);
      mu << 0.5;
      Eigen::MatrixXd cov(1, 1);
      cov << width * width;
      const DiscreteDistribution prior = discretize_gaussian(g, mu, cov);
      const ConvolutionKernel kernel = wrapped_gaussian_kernel(n, width);
      const double v0 = circular_moments(prior).second;
      const double vq =
          circular_moments(filter_success_branch(prepare_state(prior), kernel).post.hypothesis_marginal()).second;
      const double vc = circular_moments(classical_convolve(prior, kernel)).second;
      out.add("c10.amplitude_variance_gain", vq - v0);
      out.add("c10.classical_variance_gain", vc - v0);
    }

    Rng tr = rng.split({stream_id::kFiltering});
    const TrackingResult res = run_tracking(tc, tr);
    out.add("c10.alpha", res.alpha);
    out.add("c10.beta", res.beta);
    out.add("c10.predicted_variance", res.predicted);
    out.add("c10.steady_variance", res.steady);
    out.add("c10.steady_ratio", res.steady / res.predicted, res.filter_attempts);
  };
  return s;
}

// repcode: copies, protected rounds, concentration -------------------------

Scenario repcode_scenario(Params& p, const std::pair<int, int>& grid, std::uint64_t seed) {
  Scenario s;
  const double mu = p.num("mu", 0.5);
  const double x_max = p.num("x_max", 1.0);
  const double precision = p.num("precision", 0.05);
  const double fail = p.num("fail", 0.01);
  const long rounds = p.integer("rounds", 10);
  const double eps = p.num("eps", 0.01);
  const long draws = p.integer("draws", 100000);
  p.require(mu > 0.0, "mu", "must be positive");
  p.require(x_max > 0.0, "x_max", "must be positive");
  p.require(precision > 0.0, "precision", "must be positive");
  p.require(fail > 0.0 && fail < 1.0, "fail", "must lie in (0, 1)");
  p.require(rounds >= 1, "rounds", "must be >= 1");
  p.require(eps > 0.0, "eps", "must be positive");
  p.require(draws >= 100000, "draws", "must be >= 100000");
  const double expected = std::ceil(3.0 * mu * x_max / (precision * precision) * std::log(1.0 / fail));
  s.checks = {all_in("c11.required_copies", 11, expected, expected), mean_in("c11.rounds_ok", 11, 0.95, 1.0),
              all_in("c11.chernoff_max_excess", 11, -kHuge, 0.0)};

  const LatticeDistribution dist = lattice_of(DiscreteDistribution::uniform(HypothesisGrid(1, grid.second)));
  const RepetitionPlan plan = sequential_plan(mu, x_max, precision, static_cast<std::uint64_t>(rounds), eps);
  auto reg = std::make_shared<MeanRegister>();
  s.setup = [=](Sink& out) {
    out.add("c11.required_copies", static_cast<double>(required_copies(mu, x_max, precision, fail)));
    out.add("c11.sequential_copies", static_cast<double>(plan.copies));

    double excess = -kHuge;
    std::vector<LatticeDistribution> cases;
    cases.push_back(lattice_of(DiscreteDistribution::uniform(HypothesisGrid(1, 4))));
    cases.push_back({0.1, 0.8, {0.5, 0.5}});
    std::vector<double> skew(16);
    for (std::size_t j = 0; j < skew.size(); ++j) skew[j] = static_cast<double>((j + 1) * (j + 1));
    const double total = std::accumulate(skew.begin(), skew.end(), 0.0);
    for (auto& v : skew) v /= total;
    cases.push_back({1.0 / 32.0, 1.0 / 16.0, skew});
    for (const auto& c : cases)
      for (std::uint64_t k : {8, 16, 32, 64})
        for (double d : {0.05, 0.1, 0.2}) {
          const double m = c.mean();
          const MeanRegister r = mean_register_distribution(c, k, d / 4.0, 0);
          excess = std::max(excess, (1.0 - r.window_mass(m, d)) - chernoff_tail(m, c.max_value(), d, k));
        }
    out.add("c11.chernoff_max_excess", excess);

    *reg = mean_register_distribution(dist, plan.copies, precision / 4.0,
                                      Rng::stream(seed, {stream_id::kRepcode}).key(),
                                      static_cast<std::uint64_t>(draws));
    out.add("c11.window_mass", reg->window_mass(mu, precision));
    out.add("c11.window_stderr", reg->window_stderr(mu, precision));
  };
  s.trial = [=](int, const Rng& rng, Sink& out) {
    Rng r = rng.split({stream_id::kRepcode});
    const RoundsResult res = simulate_protected_rounds(dist, plan, *reg, r);
    const double worst = *std::min_element(res.overlap.begin(), res.overlap.end());
    out.add("c11.min_overlap", worst);
    out.add("c11.rounds_ok", worst >= 1.0 - fail ? 1.0 : 0.0);
    out.add("c11.budget_failures", static_cast<double>(res.failures));
  };
  return s;
}

// discretize: mesh prescription against a fine reference ----------------------

Scenario discretize_scenario(Params& p, const std::pair<int, int>& grid, const std::vector<double>& eps_list) {
  Scenario s;
  const double t = p.num("t", 1.0);
  const double omega_minus = p.num("omega_minus", 0.0);
  const auto mu_range = p.nums("mu_range", {0.4, 0.9});
  const auto sigma_range = p.nums("sigma_range", {0.05, 0.2});
  p.require(t >= 0.0, "t", "must be >= 0");
  p.require(mu_range.size() == 2 && mu_range[0] <= mu_range[1], "mu_range", "expected [lo, hi]");
  p.require(sigma_range.size() == 2 && sigma_range[0] > 0.0 && sigma_range[0] <= sigma_range[1], "sigma_range",
            "expected [lo, hi] with lo > 0");
  const double eps = eps_list.front();
  const HypothesisGrid ref(1, grid.second);
  s.checks = {all_in("c9.mean_difference", 9, 0.0, eps), all_in("c9.example_delta_x", 9, 7.6915e-4, 7.6925e-4),
              all_in("c9.example_qubits", 9, 11.0, 11.0)};
  auto lambda = std::make_shared<double>(0.0);
  s.setup = [=](Sink& out) {
    const MeshPrescription ex = mesh_bound(0.01, 1, 1.0, 0.5);
    out.add("c9.example_delta_x", ex.delta_x);
    out.add("c9.example_qubits", ex.qubits);
    const LikelihoodModel model = make_precession_model(ref, omega_minus, t);
    *lambda = estimate_lipschitz(model);
    out.add("c9.lipschitz", *lambda, model.queries());
  };
  s.trial = [=](int, const Rng& rng, Sink& out) {
    Rng r = rng.split({stream_id::kPrior});
    Eigen::VectorXd mu(1);
    mu << mu_range[0] + (mu_range[1] - mu_range[0]) * r.uniform();
    const double sd = sigma_range[0] + (sigma_range[1] - sigma_range[0]) * r.uniform();
    Eigen::MatrixXd cov(1, 1);
    cov << sd * sd;
    const DiscreteDistribution prior_ref = discretize_gaussian(ref, mu, cov);
    const LikelihoodModel model_ref = make_precession_model(ref, omega_minus, t);
    double inner = 1.0;
    for (std::size_t e = 0; e < 2; ++e) inner = std::min(inner, evidence_prob(prior_ref, model_ref, e));
    const MeshPrescription pres = mesh_bound(eps, 1, *lambda, inner);
    const int bits = std::min(pres.bits_per_dim, grid.second);
    const HypothesisGrid coarse(1, bits);
    const DiscreteDistribution prior_c = discretize_gaussian(coarse, mu, cov);
    const LikelihoodModel model_c = make_precession_model(coarse, omega_minus, t);
    double diff = 0.0;
    for (std::size_t e = 0; e < 2; ++e)
      diff = std::max(diff, std::abs(moments(bayes_update(prior_c, model_c, e)).mean[0] -
                                     moments(bayes_update(prior_ref, model_ref, e)).mean[0]));
    out.add("c9.inner", inner);
    out.add("c9.delta_x", pres.delta_x);
    out.add("c9.bits", bits);
    out.add("c9.mean_difference", diff, model_c.queries());
  };
  return s;
}

struct Defaults {
  int trials;
  std::pair<int, int> grid;
  std::vector<double> epsilon;
};

Defaults defaults_for(Experiment e) {
  switch (e) {
    case Experiment::grover: return {1, {1, 6}, {}};
    case Experiment::noisy_grover: return {1, {1, 10}, {}};
    case Experiment::stability: return {10, {1, 3}, {}};
    case Experiment::semiclassical: return {200, {1, 8}, {0.01}};
    case Experiment::scaling: return {1, {1, 8}, {0.04, 0.02, 0.01}};
    case Experiment::expdesign: return {100, {1, 6}, {0.05}};
    case Experiment::filtering: return {1, {1, 8}, {}};
    case Experiment::repcode: return {200, {1, 8}, {}};
    case Experiment::discretize: return {50, {1, 16}, {0.01}};
  }
  return {1, {1, 1}, {}};
}

Scenario build(const ScenarioConfig& config) {
  const Defaults d = defaults_for(config.experiment);
  const std::string name = experiment_name(config.experiment);
  const int trials = config.trials.value_or(d.trials);
  const auto grid = config.grid.value_or(d.grid);
  if (trials < 1) throw ConfigError("trials: must be >= 1");
  if (grid.first != 1) throw ConfigError("grid.D: experiment " + name + " supports D = 1 only");
  if (grid.second < 1 || grid.second > 20) throw ConfigError("grid.n: must lie in [1, 20]");
  if (config.experiment == Experiment::stability && grid.second > 6)
    throw ConfigError("grid.n: stability uses dense matrices, n must be <= 6");
  if (config.experiment == Experiment::grover && grid.second > 12)
    throw ConfigError("grid.n: grover supports n <= 12");
  if (d.epsilon.empty() && !config.epsilon.empty())
    throw ConfigError("epsilon: not used by experiment " + name);
  const std::vector<double> eps = config.epsilon.empty() ? d.epsilon : config.epsilon;
  for (double e : eps)
    if (!(e > 0.0)) throw ConfigError("epsilon: values must be positive");

  Params p(config.model, name);
  Scenario s;
  switch (config.experiment) {
    case Experiment::grover: s = grover_scenario(p, grid); break;
    case Experiment::noisy_grover: s = noisy_grover_scenario(p, grid); break;
    case Experiment::stability: s = stability_scenario(p, grid); break;
    case Experiment::semiclassical: s = semiclassical_scenario(p, grid, eps); break;
    case Experiment::scaling: s = scaling_scenario(p, grid, eps); break;
    case Experiment::expdesign: s = expdesign_scenario(p, grid, eps); break;
    case Experiment::filtering: s = filtering_scenario(p, grid); break;
    case Experiment::repcode: s = repcode_scenario(p, grid, config.seed); break;
    case Experiment::discretize: s = discretize_scenario(p, grid, eps); break;
  }
  p.finish();
  s.trials = trials;
  s.grid = grid;
  s.epsilon = eps;
  s.params = p.resolved();
  return s;
}

json config_json(const ScenarioConfig& config, const Scenario& s) {
  json j = json::object();
  j["experiment"] = experiment_name(config.experiment);
  j["seed"] = config.seed;
  j["trials"] = s.trials;
  j["grid"] = {{"D", s.grid.first}, {"n", s.grid.second}};
  j["epsilon"] = s.epsilon;
  j["model"] = s.params;
  j["output"] = {{"path", config.out}, {"format", config.format == Format::csv ? "csv" : "json"}};
  j["timing"] = config.timing;
  return j;
}

void write_json(std::ostream& os, const json& j) {
  switch (j.type()) {
    case json::value_t::object: {
      os << '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',';
        first = false;
        os << json(it.key()).dump() << ':';
        write_json(os, it.value());
      }
      os << '}';
      break;
    }
    case json::value_t::array: {
      os << '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ',';
        write_json(os, j[i]);
      }
      os << ']';
      break;
    }
    case json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isfinite(v)) os << fmt(v);
      else os << "null";
      break;
    }
    default: os << j.dump();
  }
}

double number_or_nan(const json& j) { return j.is_null() ? std::nan("") : j.get<double>(); }

}  // namespace

std::string experiment_name(Experiment e) {
  for (const auto& [k, v] : names())
    if (k == e) return v;
  return "unknown";
}

Experiment parse_experiment(const std::string& name) {
  for (const auto& [k, v] : names())
    if (name == v) return k;
  throw ConfigError("experiment: unknown experiment '" + name + "'");
}

const std::vector<Experiment>& all_experiments() {
  static const std::vector<Experiment> list = [] {
    std::vector<Experiment> out;
    for (const auto& kv : names()) out.push_back(kv.first);
    return out;
  }();
  return list;
}

ScenarioConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: expected a table at the top level");
  ScenarioConfig c;
  static const std::set<std::string> known = {"experiment", "seed", "trials", "grid", "epsilon",
                                              "model",      "output", "timing", "jobs"};
  for (const auto& item : doc.items())
    if (!known.count(item.key())) throw ConfigError(item.key() + ": unknown field");
  if (!doc.contains("experiment") || !doc["experiment"].is_string())
    throw ConfigError("experiment: required string field");
  c.experiment = parse_experiment(doc["experiment"].get<std::string>());
  if (doc.contains("seed")) {
    const auto& v = doc["seed"];
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError("seed: expected a nonnegative 64-bit integer");
    c.seed = v.get<std::uint64_t>();
  }
  if (doc.contains("trials")) {
    const auto& v = doc["trials"];
    if (!v.is_number_integer() || v.get<long long>() < 1) throw ConfigError("trials: expected an integer >= 1");
    c.trials = v.get<int>();
  }
  if (doc.contains("grid")) {
    const auto& v = doc["grid"];
    auto get = [&](const json& e, const char* field) {
      if (!e.is_number_integer()) throw ConfigError(std::string("grid.") + field + ": expected an integer");
      return e.get<int>();
    };
    if (v.is_array() && v.size() == 2) {
      c.grid = std::pair{get(v[0], "D"), get(v[1], "n")};
    } else if (v.is_object()) {
      for (const auto& item : v.items())
        if (item.key() != "D" && item.key() != "n") throw ConfigError("grid." + item.key() + ": unknown field");
      if (!v.contains("D") || !v.contains("n")) throw ConfigError("grid: expected both D and n");
      c.grid = std::pair{get(v["D"], "D"), get(v["n"], "n")};
    } else {
      throw ConfigError("grid: expected {D = .., n = ..} or [D, n]");
    }
  }
  if (doc.contains("epsilon")) {
    const auto& v = doc["epsilon"];
    if (v.is_number()) {
      c.epsilon = {v.get<double>()};
    } else if (v.is_array() && !v.empty()) {
      for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError("epsilon: expected a number or a list of numbers");
        c.epsilon.push_back(e.get<double>());
      }
    } else {
      throw ConfigError("epsilon: expected a number or a list of numbers");
    }
  }
  if (doc.contains("model")) {
    if (!doc["model"].is_object()) throw ConfigError("model: expected a table");
    c.model = doc["model"];
  }
  if (doc.contains("output")) {
    const auto& v = doc["output"];
    if (!v.is_object()) throw ConfigError("output: expected a table");
    for (const auto& item : v.items())
      if (item.key() != "path" && item.key() != "format") throw ConfigError("output." + item.key() + ": unknown field");
    if (v.contains("path")) {
      if (!v["path"].is_string()) throw ConfigError("output.path: expected a string");
      c.out = v["path"].get<std::string>();
    }
    if (v.contains("format")) {
      const std::string f = v["format"].is_string() ? v["format"].get<std::string>() : "";
      if (f == "csv") c.format = Format::csv;
      else if (f == "json") c.format = Format::json;
      else throw ConfigError("output.format: expected \"csv\" or \"json\"");
    }
  }
  if (doc.contains("timing")) {
    if (!doc["timing"].is_boolean()) throw ConfigError("timing: expected true or false");
    c.timing = doc["timing"].get<bool>();
  }
  if (doc.contains("jobs")) {
    if (!doc["jobs"].is_number_integer() || doc["jobs"].get<int>() < 0)
      throw ConfigError("jobs: expected an integer >= 0");
    c.jobs = doc["jobs"].get<int>();
  }
  build(c);
  return c;
}

json describe_config(const ScenarioConfig& config) { return config_json(config, build(config)); }

bool RunReport::passed() const {
  if (!errors.empty()) return false;
  for (const auto& s : summary)
    if (!s.pass) return false;
  return true;
}

std::vector<Check> checks_for(const ScenarioConfig& config) { return build(config).checks; }

std::vector<SummaryRow> summarize(const std::vector<ReportRow>& rows, const std::vector<Check>& checks) {
  std::vector<SummaryRow> out;
  std::vector<std::vector<double>> values;
  for (const auto& r : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const SummaryRow& s) { return s.metric == r.metric; });
    if (it == out.end()) {
      out.push_back({r.metric, 0.0, 0.0, 0, std::nullopt, true});
      values.emplace_back();
      it = out.end() - 1;
    }
    values[static_cast<std::size_t>(it - out.begin())].push_back(r.value);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto& v = values[i];
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    out[i].mean = mean;
    out[i].std = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    out[i].count = v.size();
  }
  for (const auto& c : checks) {
    auto it = std::find_if(out.begin(), out.end(), [&](const SummaryRow& s) { return s.metric == c.metric; });
    if (it == out.end()) {
      out.push_back({c.metric, std::nan(""), std::nan(""), 0, c, false});
      continue;
    }
    it->check = c;
    const auto& v = values[static_cast<std::size_t>(it - out.begin())];
    auto in = [&](double x) { return x >= c.lo && x <= c.hi; };
    it->pass = c.kind == Check::mean_in ? in(it->mean) : std::all_of(v.begin(), v.end(), in);
  }
  return out;
}

RunReport run_experiment(const ScenarioConfig& config) {
  Scenario s = build(config);
  RunReport report;
  report.meta = config_json(config, s);
  const std::string name = experiment_name(config.experiment);

  Sink setup(name, config.seed, 0, config.timing);
  std::string setup_error;
  try {
    s.setup(setup);
  } catch (const std::exception& e) {
    setup_error = e.what();
  }

  std::vector<std::vector<ReportRow>> rows(static_cast<std::size_t>(s.trials));
  std::vector<std::string> errors(static_cast<std::size_t>(s.trials));
  if (setup_error.empty()) {
    const int threads = config.jobs > 0 ? config.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (int t = 0; t < s.trials; ++t) {
      Sink sink(name, config.seed, t, config.timing);
      try {
        s.trial(t, Rng::stream(config.seed, {static_cast<std::uint64_t>(t)}), sink);
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(t)] = e.what();
        sink.add("error", 1.0);
      }
      rows[static_cast<std::size_t>(t)] = std::move(sink.rows);
    }
  } else {
    report.errors.push_back("setup: " + setup_error);
  }

  report.rows = std::move(setup.rows);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    report.rows.insert(report.rows.end(), rows[t].begin(), rows[t].end());
    if (!errors[t].empty()) report.errors.push_back("trial " + std::to_string(t) + ": " + errors[t]);
  }
  report.summary = summarize(report.rows, s.checks);
  return report;
}

std::string emit_report(const RunReport& report, Format format) {
  std::ostringstream os;
  if (format == Format::csv) {
    os << "scenario,seed,trial,metric,value,queries,ms\n";
    for (const auto& r : report.rows)
      os << r.scenario << ',' << r.seed << ',' << r.trial << ',' << r.metric << ',' << fmt(r.value) << ','
         << r.queries << ',' << fmt(r.ms) << '\n';
    return os.str();
  }
  json doc = json::object();
  doc["meta"] = report.meta;
  json rows = json::array();
  for (const auto& r : report.rows)
    rows.push_back({{"scenario", r.scenario}, {"seed", r.seed}, {"trial", r.trial}, {"metric", r.metric},
                    {"value", r.value}, {"queries", r.queries}, {"ms", r.ms}});
  doc["rows"] = std::move(rows);
  json summary = json::array();
  for (const auto& s : report.summary) {
    json e = {{"metric", s.metric}, {"mean", s.mean}, {"std", s.std}, {"count", s.count}, {"pass", s.pass}};
    if (s.check)
      e["check"] = {{"criterion", s.check->criterion},
                    {"kind", s.check->kind == Check::all_in ? "all_in" : "mean_in"},
                    {"lo", s.check->lo},
                    {"hi", s.check->hi}};
    summary.push_back(std::move(e));
  }
  doc["summary"] = std::move(summary);
  doc["errors"] = report.errors;
  write_json(os, doc);
  os << '\n';
  return os.str();
}

RunReport parse_report(const std::string& text) {
  const json doc = json::parse(text);
  RunReport r;
  r.meta = doc.at("meta");
  for (const auto& e : doc.at("rows"))
    r.rows.push_back({e.at("scenario").get<std::string>(), e.at("seed").get<std::uint64_t>(), e.at("trial").get<int>(),
                      e.at("metric").get<std::string>(), number_or_nan(e.at("value")),
                      e.at("queries").get<std::uint64_t>(), number_or_nan(e.at("ms"))});
  for (const auto& e : doc.at("summary")) {
    SummaryRow s{e.at("metric").get<std::string>(), number_or_nan(e.at("mean")), number_or_nan(e.at("std")),
                 e.at("count").get<std::size_t>(), std::nullopt, e.at("pass").get<bool>()};
    if (e.contains("check")) {
      const auto& c = e["check"];
      s.check = Check{s.metric, c.at("criterion").get<int>(),
                      c.at("kind").get<std::string>() == "all_in" ? Check::all_in : Check::mean_in,
                      number_or_nan(c.at("lo")), number_or_nan(c.at("hi"))};
    }
    r.summary.push_back(std::move(s));
  }
  if (doc.contains("errors")) r.errors = doc["errors"].get<std::vector<std::string>>();
  return r;
}

void ensure_writable(const std::string& path) {
  std::ofstream f(path, std::ios::out | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open output path for writing: " + path);
}

}  // namespace qbayes
