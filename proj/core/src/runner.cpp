#include "growthlab/runner.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "growthlab/bounds.hpp"
#include "growthlab/policy.hpp"

namespace growthlab {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

json clearing_to_json(const ClearingReport& rep) {
  json j;
  j["converged"] = rep.converged;
  j["iterations"] = rep.iterations;
  j["damping"] = rep.damping;
  j["max_residual"] = rep.max_residual;
  j["residuals"] = rep.residuals;
  j["residual_history"] = rep.residual_history;
  j["projections"] = rep.projections;
  j["sampled"] = rep.sampled;
  j["std_error"] = rep.std_error;
  return j;
}

ClearingReport clearing_from_json(const json& j) {
  ClearingReport rep;
  rep.converged = j.value("converged", false);
  rep.iterations = j.value("iterations", 0);
  rep.damping = j.value("damping", 0.5);
  rep.max_residual = j.value("max_residual", 0.0);
  rep.residuals = j.value("residuals", std::vector<double>{});
  rep.residual_history = j.value("residual_history", std::vector<double>{});
  rep.projections = j.value("projections", 0);
  rep.sampled = j.value("sampled", false);
  rep.std_error = j.value("std_error", std::vector<double>{});
  return rep;
}

}  // namespace

std::optional<std::string> resolve_cache_dir(const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv("GROWTHLAB_CACHE_DIR"); env && *env)
    return std::string(env);
  return std::nullopt;
}

RunOutcome run_scenario(const ScenarioConfig& config, const std::string& out_dir,
                        const std::string& cache_dir) {
  RunOutcome outcome;
  const auto t_start = std::chrono::steady_clock::now();
  json timings;

  fs::create_directories(out_dir);
  const std::uint64_t hash = scenario_hash(config);
  const std::string hash_hex = scenario_hash_hex(config);

  json report;
  report["schema_version"] = 1;
  report["kind"] = "growthlab-report";
  report["scenario_hash"] = hash_hex;
  report["scenario"] = json::parse(scenario_to_json(config));
  report["rng"] = std::string(RngStream::kName);

  // ---- validate + build ----------------------------------------------
  EventTree tree;
  try {
    tree = build_event_tree(config.process, config.params.horizon, config.params.n_agents);
  } catch (const std::exception& e) {
    outcome.error = std::string("build_event_tree: ") + e.what();
    return outcome;
  }
  const ValidationReport validation = validate_process(tree, config.process.min_unemp_prob);
  outcome.validation_passed = validation.pass;
  {
    json jv;
    jv["pass"] = validation.pass;
    jv["required_mass"] = validation.required_mass;
    jv["summary"] = validation.summary();
    json offenders = json::array();
    for (const auto& o : validation.offenders)
      offenders.push_back(json{{"class", o.class_id},
                               {"node", o.child_node},
                               {"mass_at_zero", o.mass_at_zero}});
    jv["offenders"] = offenders;
    report["validation"] = std::move(jv);
  }
  if (!validation.pass && !config.force) {
    outcome.error = "risk-of-unemployment validation failed (use force to proceed)";
    report["error"] = outcome.error;
    const fs::path report_path = fs::path(out_dir) / "report.json";
    write_file(report_path, report.dump(2) + "\n");
    outcome.report_path = report_path.string();
    return outcome;
  }

  PopulationState population;
  try {
    population = build_population(config, tree);
  } catch (const std::exception& e) {
    outcome.error = std::string("population: ") + e.what();
    return outcome;
  }
  timings["setup_s"] = seconds_since(t_start);

  // ---- forecasts + policies (cache-aware) ------------------------------
  const auto t_solve = std::chrono::steady_clock::now();
  SolverOptions solver_opts = config.solver;
  solver_opts.scenario_hash = hash;

  Forecasts forecasts;
  ClearingReport clearing;
  std::vector<Policy> policies;
  json solver_block = json::array();
  const auto cache = resolve_cache_dir(cache_dir);
  fs::path cache_file;
  if (cache) {
    char name[64];
    std::snprintf(name, sizeof name, "%016llx.json",
                  static_cast<unsigned long long>(hash));
    cache_file = fs::path(*cache) / name;
  }

  if (cache && fs::exists(cache_file)) {
    std::ifstream in(cache_file, std::ios::binary);
    json doc = json::parse(in);
    if (doc.value("kind", std::string{}) != "growthlab-cache" ||
        doc.value("schema_version", 0) != 1)
      throw std::runtime_error("cache: unrecognized artifact " + cache_file.string());
    forecasts.omega = doc.at("forecasts").get<std::vector<double>>();
    clearing = clearing_from_json(doc.at("clearing"));
    solver_block = doc.at("solver");
    for (const auto& jp : doc.at("policies"))
      policies.push_back(policy_from_json(jp.dump(), hash));
    outcome.cache_hit = true;
  } else {
    auto solved = solve_forecasts(tree, config.params, population, solver_opts,
                                  config.clearing, nullptr);
    forecasts = std::move(solved.first);
    clearing = std::move(solved.second);
    const NodeAggregates agg = propagate_aggregates(tree, config.params, forecasts);
    policies.reserve(tree.classes.size());
    for (std::size_t cl = 0; cl < tree.classes.size(); ++cl) {
      AgentProblem pb{&tree, &config.params, &forecasts, &agg, static_cast<int>(cl)};
      auto [policy, rep] = solve_policy(pb, solver_opts);
      policies.push_back(std::move(policy));
      solver_block.push_back(json{{"class", cl},
                                  {"nodes_solved", rep.nodes_solved},
                                  {"grid_points", rep.grid_points},
                                  {"max_residual", rep.max_residual},
                                  {"boundary_low", rep.boundary_low},
                                  {"boundary_high", rep.boundary_high},
                                  {"bisection_iterations", rep.bisection_iterations}});
    }
    if (cache && clearing.converged) {
      fs::create_directories(*cache);
      json doc;
      doc["schema_version"] = 1;
      doc["kind"] = "growthlab-cache";
      doc["scenario_hash"] = hash_hex;
      doc["forecasts"] = forecasts.omega;
      doc["clearing"] = clearing_to_json(clearing);
      doc["solver"] = solver_block;
      json jps = json::array();
      for (const auto& p : policies) jps.push_back(json::parse(policy_to_json(p)));
      doc["policies"] = std::move(jps);
      write_file(cache_file, doc.dump() + "\n");
    }
  }
  timings["solve_s"] = seconds_since(t_solve);

  outcome.converged = clearing.converged;
  outcome.max_clearing_residual = clearing.max_residual;
  report["clearing"] = clearing_to_json(clearing);
  report["forecasts"] = forecasts.omega;
  report["solver"] = solver_block;

  // Versioned policy artifacts, one per prospects class.
  {
    json artifacts = json::array();
    for (std::size_t cl = 0; cl < policies.size(); ++cl) {
      char name[64];
      std::snprintf(name, sizeof name, "policy_class%zu.json", cl);
      write_file(fs::path(out_dir) / name, policy_to_json(policies[cl]) + "\n");
      artifacts.push_back(name);
    }
    report["policy_artifacts"] = std::move(artifacts);
  }

  const NodeAggregates agg = propagate_aggregates(tree, config.params, forecasts);
  report["aggregates"] = json{{"output", agg.output},
                              {"wealth_base", agg.wealth_base},
                              {"wage_scale", agg.wage_scale},
                              {"capital", agg.capital}};

  if (!clearing.converged && !config.allow_unconverged) {
    outcome.error = "auctioneer failed to converge (allow_unconverged to proceed)";
    report["error"] = outcome.error;
    const fs::path report_path = fs::path(out_dir) / "report.json";
    write_file(report_path, report.dump(2) + "\n");
    outcome.report_path = report_path.string();
    return outcome;
  }

  std::vector<const Policy*> views;
  views.reserve(policies.size());
  for (const auto& p : policies) views.push_back(&p);

  // ---- bounds ----------------------------------------------------------
  const auto t_analysis = std::chrono::steady_clock::now();
  const std::vector<double> upper = gamma_upper_bound(tree, config.params, forecasts, agg);
  std::string bounds_csv =
      "node,period,class,gamma_lower,gamma_min,gamma_max,gamma_upper,degenerate\n";
  {
    char line[256];
    for (std::size_t cl = 0; cl < policies.size(); ++cl) {
      const GammaLowerBound lower =
          gamma_lower_bound(tree, config.params, forecasts, agg, static_cast<int>(cl));
      for (const auto& node : tree.nodes) {
        const auto i = static_cast<std::size_t>(node.id);
        double gmin = 0.0, gmax = 0.0;
        if (!policies[cl].terminal(node.id)) {
          gmin = policies[cl].gamma[i].front();
          gmax = policies[cl].gamma[i].back();
        }
        std::snprintf(line, sizeof line, "%d,%d,%zu,%.17g,%.17g,%.17g,%.17g,%d\n",
                      node.id, node.period, cl, lower.value[i], gmin, gmax, upper[i],
                      lower.degenerate[i] ? 1 : 0);
        bounds_csv += line;
      }
    }
  }
  write_file(fs::path(out_dir) / "bounds.csv", bounds_csv);

  // ---- simulation ------------------------------------------------------
  const SimulationPanel panel = simulate_paths(tree, config.params, forecasts, agg,
                                               views, population, config.simulation);
  write_file(fs::path(out_dir) / "panel.csv", panel_to_csv(panel));
  {
    json jp;
    jp["paths"] = config.simulation.n_paths;
    jp["seed"] = panel.seed;
    jp["rows"] = panel.rows.size();
    jp["below_floor_evals"] = panel.below_floor_evals;
    jp["max_accounting_gap"] = panel.max_accounting_gap;
    json stats = json::array();
    for (const auto& st : panel.node_stats)
      stats.push_back(json{{"node", st.node},
                           {"visits", st.visits},
                           {"mean_excess", st.mean_excess},
                           {"max_abs_excess", st.max_abs_excess}});
    jp["node_stats"] = std::move(stats);
    report["panel"] = std::move(jp);
  }

  // ---- aggregation analysis at the root --------------------------------
  const TotalVariation tv = total_variation(policies[0], tree.root());
  std::string agg_csv =
      "scenario,N,eps,bins,occupied_bins,exact,binned,error,bound,error_ratio,tv\n";
  json jagg = json::array();
  for (double eps : config.analysis.eps_list) {
    const Binning binning = bin_agents(population, views, agg, tree.root(), eps);
    const AggregationError err = aggregation_error(binning, population, views, agg);
    char line[384];
    std::snprintf(line, sizeof line, "%s,%d,%.17g,%zu,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  config.name.c_str(), config.params.n_agents, eps, binning.total_bins(),
                  binning.occupied_bins(), err.exact, err.binned, err.error, err.bound,
                  err.bound > 0.0 ? err.error / err.bound : 0.0, tv.tv_grid);
    agg_csv += line;
    jagg.push_back(json{{"eps", eps},
                        {"total_bins", binning.total_bins()},
                        {"occupied_bins", binning.occupied_bins()},
                        {"exact", err.exact},
                        {"binned", err.binned},
                        {"error", err.error},
                        {"bound", err.bound}});
  }
  write_file(fs::path(out_dir) / "aggregation.csv", agg_csv);
  report["aggregation"] = std::move(jagg);

  const DerivativeReport deriv =
      derivative_checks(policies[0], tree.root(), config.params.sigma);
  report["root_policy"] = json{{"tv_grid", tv.tv_grid},
                               {"tv_refined", tv.tv_refined},
                               {"refinement_delta", tv.refinement_delta},
                               {"min_slope", deriv.min_slope},
                               {"max_omega_times_slope", deriv.max_omega_times_slope}};

  // ---- TV stability across agent counts (same shocks, same forecasts) ---
  if (!config.analysis.n_sweep.empty() &&
      config.process.kind != ProcessSpec::Kind::explicit_tree) {
    json sweep = json::array();
    for (int n : config.analysis.n_sweep) {
      const EventTree tree_n = build_event_tree(config.process, config.params.horizon, n);
      EconomyParams params_n = config.params;
      params_n.n_agents = n;
      const NodeAggregates agg_n = propagate_aggregates(tree_n, params_n, forecasts);
      AgentProblem pb{&tree_n, &params_n, &forecasts, &agg_n, 0};
      const Policy policy_n = solve_policy(pb, solver_opts).first;
      const TotalVariation tv_n = total_variation(policy_n, tree_n.root());
      sweep.push_back(json{{"N", n}, {"tv_grid", tv_n.tv_grid}, {"tv_refined", tv_n.tv_refined}});
    }
    report["tv_sweep"] = std::move(sweep);
  }
  timings["analysis_s"] = seconds_since(t_analysis);
  timings["total_s"] = seconds_since(t_start);
  // Everything that may differ between a fresh solve and a cache hit lives
  // under "run"; the rest of the report is a pure function of the scenario.
  report["run"] = json{{"cache_hit", outcome.cache_hit}, {"timings", std::move(timings)}};

  const fs::path report_path = fs::path(out_dir) / "report.json";
  write_file(report_path, report.dump(2) + "\n");
  outcome.report_path = report_path.string();
  outcome.ok = true;
  return outcome;
}

}  // namespace growthlab
