#include <doctest.h>

#include <cstdio>
#include <string>

#include "qbayes/harness.hpp"

using namespace qbayes;
using nlohmann::json;

namespace {
ScenarioConfig small_grover(std::uint64_t seed = 5) {
  return parse_config(json{{"experiment", "grover"},
                           {"seed", seed},
                           {"trials", 3},
                           {"grid", {1, 3}},
                           {"model", {{"marked", {2, 5}}, {"instances", 5}, {"max_updates", 4}}}});
}

bool config_error_mentions(const json& doc, const std::string& field) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return std::string(e.what()).find(field) != std::string::npos;
  }
  return false;
}
}  // namespace

TEST_SUITE("harness") {
TEST_CASE("experiment names") {
  CHECK(all_experiments().size() == 9);
  for (Experiment e : all_experiments()) CHECK(parse_experiment(experiment_name(e)) == e);
  CHECK(experiment_name(Experiment::noisy_grover) == "noisy-grover");
  CHECK_THROWS_AS(parse_experiment("noisy_grover"), ConfigError);
}

TEST_CASE("config errors name the field") {
  CHECK(config_error_mentions(json{{"seed", 1}}, "experiment"));
  CHECK(config_error_mentions(json{{"experiment", "grover"}, {"trials", 0}}, "trials"));
  CHECK(config_error_mentions(json{{"experiment", "grover"}, {"grid", {2, 3}}}, "grid"));
  CHECK(config_error_mentions(json{{"experiment", "grover"}, {"epsilon", 0.1}}, "epsilon"));
  CHECK(config_error_mentions(json{{"experiment", "grover"}, {"colour", 1}}, "colour"));
  CHECK(config_error_mentions(json{{"experiment", "grover"}, {"output", {{"format", "xml"}}}}, "format"));
  CHECK(config_error_mentions(json{{"experiment", "semiclassical"}, {"epsilon", {-0.1}}}, "epsilon"));
  CHECK(config_error_mentions(json{{"experiment", "grover"}, {"model", {{"bogus", 1}}}}, "model.bogus"));
  CHECK(config_error_mentions(json{{"experiment", "grover"}, {"model", {{"marked", {99}}}}}, "marked"));
}

TEST_CASE("defaults are filled in") {
  const auto d = describe_config(parse_config(json{{"experiment", "semiclassical"}}));
  CHECK(d["trials"] == 200);
  CHECK(d["epsilon"] == json::array({0.01}));
  CHECK(d["model"].contains("omega"));
}

TEST_CASE("csv layout") {
  RunReport empty;
  CHECK(emit_report(empty, Format::csv) == "scenario,seed,trial,metric,value,queries,ms\n");
  RunReport one;
  one.rows.push_back({"grover", 3, 0, "m", 0.1, 8, 0.0});
  CHECK(emit_report(one, Format::csv) ==
        "scenario,seed,trial,metric,value,queries,ms\ngrover,3,0,m,0.10000000000000001,8,0\n");
}

TEST_CASE("json round trip") {
  const auto r = run_experiment(small_grover());
  const auto back = parse_report(emit_report(r, Format::json));
  CHECK(back.rows == r.rows);
  CHECK(back.summary == r.summary);
  CHECK(back.errors == r.errors);
  CHECK(back.meta == r.meta);
}

TEST_CASE("small grover run passes its checks") {
  const auto r = run_experiment(small_grover());
  CHECK(r.errors.empty());
  CHECK(r.passed());
  for (const auto& row : r.rows) CHECK(row.ms == 0.0);
}

TEST_CASE("deterministic across runs and thread counts") {
  auto a = small_grover(11);
  auto b = small_grover(11);
  a.jobs = 1;
  b.jobs = 3;
  CHECK(emit_report(run_experiment(a), Format::csv) == emit_report(run_experiment(b), Format::csv));
  CHECK(emit_report(run_experiment(a), Format::csv) == emit_report(run_experiment(a), Format::csv));
  auto c = parse_config(json{{"experiment", "stability"}, {"seed", 4}, {"trials", 4}, {"jobs", 1}});
  auto d = c;
  d.jobs = 4;
  CHECK(emit_report(run_experiment(c), Format::csv) == emit_report(run_experiment(d), Format::csv));
}

TEST_CASE("summaries and checks") {
  std::vector<ReportRow> rows = {{"x", 1, 0, "a", 1.0, 0, 0}, {"x", 1, 1, "a", 3.0, 0, 0}, {"x", 1, 0, "b", 5.0, 0, 0}};
  const auto s = summarize(rows, {{"a", 1, Check::mean_in, 1.5, 2.5}, {"b", 2, Check::all_in, 0.0, 4.0}});
  REQUIRE(s.size() == 2);
  CHECK(s[0].metric == "a");
  CHECK(s[0].mean == doctest::Approx(2.0));
  CHECK(s[0].count == 2);
  CHECK(s[0].pass);
  CHECK_FALSE(s[1].pass);
  RunReport r;
  r.summary = {s[0]};
  CHECK(r.passed());
  r.errors.push_back("trial 0: boom");
  CHECK_FALSE(r.passed());
}

TEST_CASE("unwritable output") {
  CHECK_THROWS_AS(ensure_writable("/nonexistent-dir/x/report.csv"), std::runtime_error);
  const std::string ok = "harness_writable_probe.csv";
  CHECK_NOTHROW(ensure_writable(ok));
  std::remove(ok.c_str());
}
}
