#pragma once

// Scenario driver: declarative configs, seeded trials, query ledgers, and
// CSV/JSON reports with per-criterion summaries.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace qbayes {

enum class Experiment { grover, noisy_grover, stability, semiclassical, scaling, expdesign, filtering, repcode, discretize };
enum class Format { csv, json };

std::string experiment_name(Experiment e);
/// Accepts the hyphenated names ("noisy-grover"); throws ConfigError otherwise.
Experiment parse_experiment(const std::string& name);
const std::vector<Experiment>& all_experiments();

/// Schema violation; the message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

struct ScenarioConfig {
  Experiment experiment = Experiment::grover;
  std::uint64_t seed = 1;
  /// Unset fields take the experiment's defaults.
  std::optional<int> trials;
  std::optional<std::pair<int, int>> grid;  // (D, n)
  std::vector<double> epsilon;
  nlohmann::json model = nlohmann::json::object();
  std::string out;  // empty = stdout
  Format format = Format::csv;
  int jobs = 0;  // 0 = OpenMP default
  bool timing = false;
};

/// Parses a config document (see docs/config.md). Throws ConfigError.
ScenarioConfig parse_config(const nlohmann::json& doc);
/// Effective config with defaults filled in.
nlohmann::json describe_config(const ScenarioConfig& config);

struct ReportRow {
  std::string scenario;
  std::uint64_t seed = 0;
  int trial = 0;
  std::string metric;
  double value = 0.0;
  std::uint64_t queries = 0;
  double ms = 0.0;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

/// Pass rule over the values of one metric.
struct Check {
  std::string metric;
  int criterion = 0;
  enum Kind { all_in, mean_in } kind = all_in;
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Check&, const Check&) = default;
};

struct SummaryRow {
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  std::size_t count = 0;
  std::optional<Check> check;
  bool pass = true;

  friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

struct RunReport {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<ReportRow> rows;
  std::vector<SummaryRow> summary;
  std::vector<std::string> errors;  // "trial <i>: <message>"

  /// All checks pass and no trial failed.
  bool passed() const;
};

/// The pass rules --check applies for an experiment.
std::vector<Check> checks_for(const ScenarioConfig& config);

/// Runs every trial of the scenario; trials run concurrently (config.jobs
/// threads) and are merged in trial order. Module errors are recorded per
/// trial and the run continues.
RunReport run_experiment(const ScenarioConfig& config);

/// Mean/std/count per metric in first-appearance order, with checks applied.
std::vector<SummaryRow> summarize(const std::vector<ReportRow>& rows, const std::vector<Check>& checks);

/// CSV (header scenario,seed,trial,metric,value,queries,ms) or JSON with
/// meta/rows/summary; reals use 17 significant digits.
std::string emit_report(const RunReport& report, Format format);
/// Inverse of emit_report(.., Format::json).
RunReport parse_report(const std::string& json_text);

/// Throws std::runtime_error unless `path` can be opened for writing.
void ensure_writable(const std::string& path);

}  // namespace qbayes
