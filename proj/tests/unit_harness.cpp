#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "growthlab/runner.hpp"
#include "growthlab/scenario.hpp"

using namespace growthlab;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Frozen content hash of kAnchorScenario.  Any change to the canonical
// serialization or the hash function must be deliberate: it invalidates
// every cache entry and policy artifact in the wild.
constexpr const char* kGoldenHashHex = "fnv1a64:c2dd5debada14bc4";

const char* kAnchorScenario = R"({
  "spec_version": 1,
  "name": "hash-anchor",
  "params": {"alpha": 0.36, "beta": 0.95, "sigma": 1.0, "delta": 1.0, "T": 2, "N": 4, "Y1": 1.0},
  "process": {"kind": "uniform-employment", "u": 0.1},
  "analysis": {"eps": [0.05]}
})";

std::string scenario_dir() { return GROWTHLAB_SCENARIO_DIR; }

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("growthlab-harness-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
};

json read_json(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  json doc;
  in >> doc;
  return doc;
}

void expect_parse_error(const std::string& text, const std::string& needle) {
  try {
    (void)scenario_from_json(text);
    FAIL_CHECK("expected a parse error mentioning '" << needle << "'");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find(needle) != std::string::npos);
  }
}

}  // namespace

TEST_CASE("scenario parsing: malformed configs fail with field-tagged messages") {
  expect_parse_error("{", "json");
  expect_parse_error(R"({"name": "x"})", "spec_version");
  expect_parse_error(R"({"spec_version": 2})", "spec_version");
  expect_parse_error(R"({"spec_version": 1})", "process");
  expect_parse_error(
      R"({"spec_version": 1, "process": {"kind": "uniform-employment"}})",
      "u: missing");
  expect_parse_error(
      R"({"spec_version": 1, "process": {"kind": "weather"}})", "process.kind");
  expect_parse_error(
      R"({"spec_version": 1, "params": {"beta": 1.5},
          "process": {"kind": "uniform-employment", "u": 0.1}})",
      "params");
  expect_parse_error(
      R"({"spec_version": 1, "process": {"kind": "ks-markov",
          "z_good": 1.05, "z_bad": 0.95,
          "p": [[0.9, 0.1], [0.1, 0.9]], "pi": [0.1, 0.2]}})",
      "process.pi");
  expect_parse_error(
      R"({"spec_version": 1, "process": {"kind": "uniform-employment", "u": 0.1},
          "analysis": {"eps": [0.0]}})",
      "analysis.eps");
  expect_parse_error(
      R"({"spec_version": 1, "process": {"kind": "uniform-employment", "u": 0.1},
          "analysis": {"n_sweep": [0]}})",
      "analysis.n_sweep");
  expect_parse_error(
      R"({"spec_version": 1, "process": {"kind": "uniform-employment", "u": 0.1},
          "simulation": {"paths": 0}})",
      "simulation.paths");
  expect_parse_error(
      R"({"spec_version": 1, "process": {"kind": "uniform-employment", "u": 0.1},
          "auctioneer": {"damping": 0.0}})",
      "auctioneer.damping");
}

TEST_CASE("scenario hash: golden value, canonical round-trip, volatile-field immunity") {
  const ScenarioConfig cfg = scenario_from_json(kAnchorScenario);
  CHECK(scenario_hash_hex(cfg) == kGoldenHashHex);

  // Round trip through the canonical serialization preserves the hash.
  const ScenarioConfig again = scenario_from_json(scenario_to_json(cfg));
  CHECK(scenario_hash(again) == scenario_hash(cfg));
  CHECK(again.name == cfg.name);
  CHECK(again.params.beta == cfg.params.beta);
  CHECK(again.analysis.eps_list == cfg.analysis.eps_list);

  // Run-control toggles do not change identity...
  json doc = json::parse(kAnchorScenario);
  doc["allow_unconverged"] = true;
  doc["force"] = true;
  const ScenarioConfig toggled = scenario_from_json(doc.dump());
  CHECK(toggled.allow_unconverged);
  CHECK(toggled.force);
  CHECK(scenario_hash(toggled) == scenario_hash(cfg));

  // ...while substantive fields do.
  doc["params"]["beta"] = 0.9;
  CHECK(scenario_hash(scenario_from_json(doc.dump())) != scenario_hash(cfg));
}

TEST_CASE("population construction per scenario kind") {
  SUBCASE("equal: exact 1/N shares") {
    ScenarioConfig cfg = scenario_from_json(kAnchorScenario);
    cfg.population.kind = PopulationSpec::Kind::equal;
    const EventTree tree =
        build_event_tree(cfg.process, cfg.params.horizon, cfg.params.n_agents);
    const PopulationState pop = build_population(cfg, tree);
    REQUIRE(pop.size() == 4);
    for (double w : pop.omega) CHECK(w == 0.25);
  }

  SUBCASE("drawn: deterministic in the seed, wealth sums to one") {
    json doc = json::parse(kAnchorScenario);
    doc["population"] = {{"kind", "drawn"}, {"spread", 0.3}, {"seed", 7}};
    const ScenarioConfig cfg = scenario_from_json(doc.dump());
    const EventTree tree =
        build_event_tree(cfg.process, cfg.params.horizon, cfg.params.n_agents);
    const PopulationState a = build_population(cfg, tree);
    const PopulationState b = build_population(cfg, tree);
    CHECK(a.omega == b.omega);
    CHECK(a.total_wealth() == doctest::Approx(1.0).epsilon(1e-12));
    bool any_different = false;
    for (std::size_t j = 1; j < a.omega.size(); ++j)
      if (a.omega[j] != a.omega[0]) any_different = true;
    CHECK(any_different);

    json other = doc;
    other["population"]["seed"] = 8;
    const PopulationState c =
        build_population(scenario_from_json(other.dump()), tree);
    CHECK(c.omega != a.omega);
  }

  SUBCASE("explicit: shares must sum to one") {
    json doc = json::parse(kAnchorScenario);
    doc["population"] = {{"kind", "explicit"},
                         {"classes", {0, 0, 0, 0}},
                         {"omegas", {0.4, 0.3, 0.2, 0.2}}};
    const ScenarioConfig cfg = scenario_from_json(doc.dump());
    const EventTree tree =
        build_event_tree(cfg.process, cfg.params.horizon, cfg.params.n_agents);
    CHECK_THROWS_AS(build_population(cfg, tree), std::runtime_error);

    doc["population"]["omegas"] = {0.4, 0.3, 0.2, 0.1};
    const PopulationState pop =
        build_population(scenario_from_json(doc.dump()), tree);
    CHECK(pop.omega[0] == 0.4);
    CHECK(pop.total_wealth() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("cache directory resolution order") {
  ::unsetenv("GROWTHLAB_CACHE_DIR");
  CHECK_FALSE(resolve_cache_dir().has_value());
  CHECK(resolve_cache_dir("/tmp/explicit").value() == "/tmp/explicit");
  ::setenv("GROWTHLAB_CACHE_DIR", "/tmp/from-env", 1);
  CHECK(resolve_cache_dir().value() == "/tmp/from-env");
  CHECK(resolve_cache_dir("/tmp/explicit").value() == "/tmp/explicit");
  ::unsetenv("GROWTHLAB_CACHE_DIR");
}

TEST_CASE("full pipeline writes the artifact set and is cache-stable") {
  const ScenarioConfig cfg =
      load_scenario(scenario_dir() + "/uniform_baseline.json");
  TempDir out1, out2, cache;

  const RunOutcome first = run_scenario(cfg, out1.str(), cache.str());
  REQUIRE(first.ok);
  CHECK(first.validation_passed);
  CHECK(first.converged);
  CHECK_FALSE(first.cache_hit);
  CHECK(first.max_clearing_residual <= 1e-8);

  for (const char* name :
       {"report.json", "panel.csv", "aggregation.csv", "bounds.csv",
        "policy_class0.json"})
    CHECK(fs::exists(out1.path / name));

  json report = read_json(out1.path / "report.json");
  for (const char* key :
       {"schema_version", "kind", "scenario_hash", "scenario", "validation",
        "forecasts", "clearing", "solver", "aggregates", "panel",
        "aggregation", "root_policy", "policy_artifacts", "rng", "run"})
    CHECK(report.contains(key));
  CHECK(report["kind"] == "growthlab-report");
  CHECK(report["validation"]["pass"] == true);
  CHECK(report["clearing"]["converged"] == true);
  CHECK(report["run"]["cache_hit"] == false);
  CHECK(report["aggregation"].size() == cfg.analysis.eps_list.size());

  // bounds.csv: header plus one row per (node, class)
  std::ifstream bounds(out1.path / "bounds.csv");
  std::string header;
  std::getline(bounds, header);
  CHECK(header ==
        "node,period,class,gamma_lower,gamma_min,gamma_max,gamma_upper,degenerate");

  // Second run hits the cache and reproduces the report minus the run block.
  const RunOutcome second = run_scenario(cfg, out2.str(), cache.str());
  REQUIRE(second.ok);
  CHECK(second.cache_hit);
  json r1 = read_json(out1.path / "report.json");
  json r2 = read_json(out2.path / "report.json");
  CHECK(r1["run"]["cache_hit"] == false);
  CHECK(r2["run"]["cache_hit"] == true);
  r1.erase("run");
  r2.erase("run");
  CHECK(r1 == r2);

  // Policy artifacts carry the scenario hash and round-trip.
  std::ifstream pol_in(out1.path / "policy_class0.json");
  std::stringstream ss;
  ss << pol_in.rdbuf();
  const Policy pol = policy_from_json(ss.str(), scenario_hash(cfg));
  CHECK(pol.class_id == 0);
}

TEST_CASE("validation failure blocks the run unless forced") {
  json doc = json::parse(kAnchorScenario);
  doc["process"]["u"] = 0.03;  // below the default 0.05 requirement
  const ScenarioConfig cfg = scenario_from_json(doc.dump());
  TempDir out;
  const RunOutcome outcome = run_scenario(cfg, out.str());
  CHECK_FALSE(outcome.ok);
  CHECK_FALSE(outcome.validation_passed);
  CHECK(!outcome.error.empty());

  const json report = read_json(out.path / "report.json");
  CHECK(report["validation"]["pass"] == false);
  CHECK(report["validation"]["offenders"].size() > 0);

  doc["force"] = true;
  TempDir forced_out;
  const RunOutcome forced = run_scenario(scenario_from_json(doc.dump()), forced_out.str());
  CHECK(forced.ok);
  CHECK_FALSE(forced.validation_passed);
}

TEST_CASE("non-convergence is an error unless explicitly allowed") {
  json doc = json::parse(kAnchorScenario);
  doc["auctioneer"] = {{"max_iters", 1}, {"clearing_tol", 1e-13}};
  const ScenarioConfig strict = scenario_from_json(doc.dump());
  TempDir out;
  const RunOutcome blocked = run_scenario(strict, out.str());
  CHECK_FALSE(blocked.ok);
  CHECK_FALSE(blocked.converged);
  CHECK(!blocked.error.empty());

  doc["allow_unconverged"] = true;
  TempDir out2;
  const RunOutcome tolerated = run_scenario(scenario_from_json(doc.dump()), out2.str());
  CHECK(tolerated.ok);
  CHECK_FALSE(tolerated.converged);
  const json report = read_json(out2.path / "report.json");
  CHECK(report["clearing"]["converged"] == false);
}

TEST_CASE("agent-count sweep records root-policy variation per N") {
  json doc = json::parse(kAnchorScenario);
  doc["analysis"]["n_sweep"] = {4, 8};
  const ScenarioConfig cfg = scenario_from_json(doc.dump());
  TempDir out;
  const RunOutcome outcome = run_scenario(cfg, out.str());
  REQUIRE(outcome.ok);
  const json report = read_json(out.path / "report.json");
  REQUIRE(report.contains("tv_sweep"));
  REQUIRE(report["tv_sweep"].size() == 2);
  for (const auto& entry : report["tv_sweep"]) {
    CHECK(entry.contains("N"));
    CHECK(entry.contains("tv_grid"));
    CHECK(entry.contains("tv_refined"));
    CHECK(entry["tv_grid"].get<double>() >= 0.0);
  }
}
