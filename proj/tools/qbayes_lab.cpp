// qbayes-lab: run a scenario, write its report, optionally gate on the criteria.
//
//   qbayes-lab grover --seed 3 --out grover.csv --check
//   qbayes-lab run --config configs/semiclassical.json --format json
//   qbayes-lab all --check

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qbayes/harness.hpp"

using nlohmann::json;
using namespace qbayes;

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<int> jobs;
  std::string out;
  std::string format;
  std::vector<int> grid;
  std::vector<double> epsilon;
  std::vector<std::string> set;
  bool check = false;
  bool timing = false;
  bool dry_run = false;
};

void add_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON scenario file; flags override its values")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "64-bit seed");
  cmd->add_option("--trials", f.trials, "number of trials")->check(CLI::PositiveNumber);
  cmd->add_option("--jobs", f.jobs, "concurrent trials (0 = all cores)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", f.out, "report path (default stdout)");
  cmd->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--grid", f.grid, "D n")->expected(2);
  cmd->add_option("--epsilon", f.epsilon, "epsilon ladder")->expected(1, -1);
  cmd->add_option("--set", f.set, "model parameter key=value (value parsed as JSON)");
  cmd->add_flag("--check", f.check, "exit 1 unless every criterion check passes");
  cmd->add_flag("--timing", f.timing, "fill the ms column with wall time");
  cmd->add_flag("--dry-run", f.dry_run, "print the effective config and exit");
}

json load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

json merge(const Flags& f, const std::string& experiment) {
  json doc = f.config.empty() ? json::object() : load(f.config);
  if (!doc.is_object()) throw ConfigError("config: expected a table at the top level");
  if (!experiment.empty()) {
    if (doc.contains("experiment") && doc["experiment"] != experiment)
      throw ConfigError("experiment: config file names " + doc["experiment"].dump() + " but the subcommand is " +
                        experiment);
    doc["experiment"] = experiment;
  }
  if (f.seed) doc["seed"] = *f.seed;
  if (f.trials) doc["trials"] = *f.trials;
  if (f.jobs) doc["jobs"] = *f.jobs;
  if (!f.grid.empty()) doc["grid"] = {{"D", f.grid[0]}, {"n", f.grid[1]}};
  if (!f.epsilon.empty()) doc["epsilon"] = f.epsilon;
  if (!f.out.empty()) doc["output"]["path"] = f.out;
  if (!f.format.empty()) doc["output"]["format"] = f.format;
  if (f.timing) doc["timing"] = true;
  for (const auto& kv : f.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--set: expected key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string text = kv.substr(eq + 1);
    json value;
    try {
      value = json::parse(text);
    } catch (const json::parse_error&) {
      value = text;
    }
    doc["model"][key] = value;
  }
  return doc;
}

void print_checks(const RunReport& r, const std::string& name) {
  for (const auto& s : r.summary) {
    if (!s.check) continue;
    std::fprintf(stderr, "[%s] criterion %d %-34s %s  mean=%.6g n=%zu\n", name.c_str(), s.check->criterion,
                 s.metric.c_str(), s.pass ? "PASS" : "FAIL", s.mean, s.count);
  }
  for (const auto& e : r.errors) std::fprintf(stderr, "[%s] error: %s\n", name.c_str(), e.c_str());
}

void write(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::out | std::ios::trunc);
  f << text;
  if (!f) throw std::runtime_error("failed writing " + path);
}

int run_one(const Flags& f, const std::string& experiment) {
  const ScenarioConfig config = parse_config(merge(f, experiment));
  if (f.dry_run) {
    std::cout << describe_config(config).dump(2) << '\n';
    return 0;
  }
  describe_config(config);
  if (!config.out.empty()) ensure_writable(config.out);
  const RunReport report = run_experiment(config);
  write(config.out, emit_report(report, config.format));
  if (f.check) print_checks(report, experiment_name(config.experiment));
  return f.check && !report.passed() ? 1 : 0;
}

int run_all(const Flags& f) {
  if (!f.config.empty() || !f.grid.empty() || !f.epsilon.empty() || !f.set.empty() || f.trials)
    throw ConfigError("all: runs every experiment with its defaults; only --seed, --jobs, --out, --format, "
                      "--timing and --check apply");
  if (f.format == "json") throw ConfigError("all: output is CSV only");
  if (!f.out.empty()) ensure_writable(f.out);
  std::string text = "scenario,seed,trial,metric,value,queries,ms\n";
  bool ok = true;
  for (Experiment e : all_experiments()) {
    Flags one = f;
    one.out.clear();
    const ScenarioConfig config = parse_config(merge(one, experiment_name(e)));
    const RunReport report = run_experiment(config);
    const std::string csv = emit_report(report, Format::csv);
    text += csv.substr(csv.find('\n') + 1);
    if (f.check) print_checks(report, experiment_name(e));
    ok = ok && report.passed();
  }
  write(f.out, text);
  return f.check && !ok ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum Bayesian inference simulator and verification lab"};
  app.require_subcommand(1);
  std::vector<std::pair<CLI::App*, std::string>> commands;
  std::vector<Flags> flags(all_experiments().size() + 2);
  std::size_t k = 0;
  for (Experiment e : all_experiments()) {
    auto* cmd = app.add_subcommand(experiment_name(e), "run the " + experiment_name(e) + " scenario");
    add_flags(cmd, flags[k++]);
    commands.push_back({cmd, experiment_name(e)});
  }
  auto* run = app.add_subcommand("run", "run the scenario named by --config");
  add_flags(run, flags[k++]);
  auto* all = app.add_subcommand("all", "run every scenario with defaults");
  add_flags(all, flags[k]);
  app.add_subcommand("list", "list experiment names")->callback([] {
    for (Experiment e : all_experiments()) std::cout << experiment_name(e) << '\n';
  });

  CLI11_PARSE(app, argc, argv);

  try {
    for (std::size_t i = 0; i < commands.size(); ++i)
      if (commands[i].first->parsed()) return run_one(flags[i], commands[i].second);
    if (run->parsed()) {
      if (flags[commands.size()].config.empty()) throw ConfigError("run: --config is required");
      return run_one(flags[commands.size()], "");
    }
    if (all->parsed()) return run_all(flags[commands.size() + 1]);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
