#include "growthlab/scenario.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace growthlab {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& problem) {
  throw std::runtime_error(field + ": " + problem);
}

double require_number(const json& j, const std::string& field) {
  if (!j.contains(field) || !j[field].is_number()) bad(field, "missing or not a number");
  return j[field].get<double>();
}

EventTree explicit_tree_from_json(const json& jt) {
  EventTree tree;
  if (!jt.contains("nodes") || !jt["nodes"].is_array()) bad("tree.nodes", "missing array");
  for (const auto& jn : jt["nodes"]) {
    TreeNode n;
    n.id = jn.at("id").get<int>();
    n.period = jn.at("period").get<int>();
    n.shock = jn.value("z", 1.0);
    n.parent = jn.value("parent", -1);
    if (jn.contains("children")) n.children = jn["children"].get<std::vector<int>>();
    if (jn.contains("child_prob"))
      n.child_prob = jn["child_prob"].get<std::vector<double>>();
    tree.nodes.push_back(std::move(n));
  }
  if (!jt.contains("classes") || !jt["classes"].is_array())
    bad("tree.classes", "missing array");
  for (const auto& jc : jt["classes"]) {
    ProspectsClass cl;
    cl.name = jc.value("name", "class");
    cl.edge_dist.resize(tree.nodes.size());
    if (!jc.contains("edges") || !jc["edges"].is_array()) bad("tree.classes.edges", "missing");
    for (const auto& je : jc["edges"]) {
      const auto node = je.at("node").get<std::size_t>();
      if (node == 0 || node >= tree.nodes.size()) bad("tree.classes.edges", "bad node id");
      cl.edge_dist[node].support = je.at("support").get<std::vector<double>>();
      cl.edge_dist[node].prob = je.at("prob").get<std::vector<double>>();
    }
    tree.classes.push_back(std::move(cl));
  }
  tree.z_max = jt.value("z_max", 0.0);
  return tree;
}

json explicit_tree_to_json(const EventTree& tree) {
  json jt;
  jt["nodes"] = json::array();
  for (const auto& n : tree.nodes) {
    json jn{{"id", n.id},         {"period", n.period},   {"z", n.shock},
            {"parent", n.parent}, {"children", n.children}, {"child_prob", n.child_prob}};
    jt["nodes"].push_back(std::move(jn));
  }
  jt["classes"] = json::array();
  for (const auto& cl : tree.classes) {
    json jc{{"name", cl.name}};
    jc["edges"] = json::array();
    for (std::size_t i = 1; i < cl.edge_dist.size(); ++i)
      jc["edges"].push_back(json{{"node", i},
                                 {"support", cl.edge_dist[i].support},
                                 {"prob", cl.edge_dist[i].prob}});
    jt["classes"].push_back(std::move(jc));
  }
  if (tree.z_max > 0.0) jt["z_max"] = tree.z_max;
  return jt;
}

}  // namespace

ScenarioConfig scenario_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    bad("json", e.what());
  }
  ScenarioConfig cfg;
  if (!doc.contains("spec_version")) bad("spec_version", "missing");
  cfg.spec_version = doc["spec_version"].get<int>();
  if (cfg.spec_version != 1) bad("spec_version", "unsupported version");
  cfg.name = doc.value("name", std::string("scenario"));

  const auto& jp = doc.contains("params") ? doc["params"] : json::object();
  cfg.params.alpha = jp.value("alpha", cfg.params.alpha);
  cfg.params.beta = jp.value("beta", cfg.params.beta);
  cfg.params.sigma = jp.value("sigma", cfg.params.sigma);
  cfg.params.delta = jp.value("delta", cfg.params.delta);
  cfg.params.horizon = jp.value("T", cfg.params.horizon);
  cfg.params.n_agents = jp.value("N", cfg.params.n_agents);
  cfg.params.y1 = jp.value("Y1", cfg.params.y1);
  cfg.params.labor_norm = jp.value("L", cfg.params.labor_norm);
  try {
    cfg.params.validate();
  } catch (const std::invalid_argument& e) {
    bad("params", e.what());
  }

  if (!doc.contains("process") || !doc["process"].is_object()) bad("process", "missing");
  const auto& jpr = doc["process"];
  const std::string kind = jpr.value("kind", std::string());
  cfg.process.min_unemp_prob = jpr.value("min_unemp_prob", cfg.process.min_unemp_prob);
  cfg.process.z_ceiling = jpr.value("z_max", 0.0);
  if (kind == "uniform-employment") {
    cfg.process.kind = ProcessSpec::Kind::uniform_employment;
    cfg.process.uniform.unemployment_rate = require_number(jpr, "u");
    if (jpr.contains("shocks"))
      cfg.process.uniform.shocks = jpr["shocks"].get<std::vector<double>>();
  } else if (kind == "ks-markov") {
    cfg.process.kind = ProcessSpec::Kind::ks_markov;
    auto& ks = cfg.process.ks;
    ks.z_good = require_number(jpr, "z_good");
    ks.z_bad = require_number(jpr, "z_bad");
    const auto p = jpr.at("p").get<std::vector<std::vector<double>>>();
    if (p.size() != 2 || p[0].size() != 2 || p[1].size() != 2)
      bad("process.p", "expected a 2x2 matrix");
    for (int s = 0; s < 2; ++s)
      for (int s2 = 0; s2 < 2; ++s2)
        ks.p[static_cast<std::size_t>(s)][static_cast<std::size_t>(s2)] =
            p[static_cast<std::size_t>(s)][static_cast<std::size_t>(s2)];
    const auto pi = jpr.at("pi").get<std::vector<double>>();
    if (pi.size() != 16) bad("process.pi", "expected 16 joint probabilities (ss'ee')");
    std::size_t idx = 0;
    for (int s = 0; s < 2; ++s)
      for (int s2 = 0; s2 < 2; ++s2)
        for (int e = 0; e < 2; ++e)
          for (int e2 = 0; e2 < 2; ++e2) ks.pi[s][s2][e][e2] = pi[idx++];
    ks.start_state = jpr.value("start", std::string("good")) == "bad" ? 1 : 0;
    ks.initial_unemployment = jpr.value("u0", 0.1);
  } else if (kind == "explicit-tree") {
    cfg.process.kind = ProcessSpec::Kind::explicit_tree;
    cfg.process.explicit_tree = explicit_tree_from_json(jpr.at("tree"));
  } else {
    bad("process.kind", "expected uniform-employment, ks-markov, or explicit-tree");
  }

  if (doc.contains("solver")) {
    const auto& js = doc["solver"];
    cfg.solver.grid_points = js.value("grid_points", cfg.solver.grid_points);
    cfg.solver.omega_min = js.value("omega_min", cfg.solver.omega_min);
    cfg.solver.foc_tol = js.value("foc_tol", cfg.solver.foc_tol);
    cfg.solver.secant_polish = js.value("secant_polish", cfg.solver.secant_polish);
    if (cfg.solver.grid_points < 2) bad("solver.grid_points", "need at least 2");
    if (!(cfg.solver.omega_min > 0.0)) bad("solver.omega_min", "must be positive");
  }
  if (doc.contains("auctioneer")) {
    const auto& ja = doc["auctioneer"];
    cfg.clearing.damping = ja.value("damping", cfg.clearing.damping);
    cfg.clearing.max_iters = ja.value("max_iters", cfg.clearing.max_iters);
    cfg.clearing.tol = ja.value("clearing_tol", cfg.clearing.tol);
    cfg.clearing.enumeration_cap =
        ja.value("enumeration_cap", cfg.clearing.enumeration_cap);
    cfg.clearing.sample_paths = ja.value("sample_paths", cfg.clearing.sample_paths);
    if (!(cfg.clearing.damping > 0.0) || cfg.clearing.damping > 1.0)
      bad("auctioneer.damping", "must lie in (0,1]");
    if (cfg.clearing.max_iters < 1) bad("auctioneer.max_iters", "must be positive");
  }
  if (doc.contains("population")) {
    const auto& jpop = doc["population"];
    const std::string pk = jpop.value("kind", std::string("drawn"));
    if (pk == "equal")
      cfg.population.kind = PopulationSpec::Kind::equal;
    else if (pk == "drawn")
      cfg.population.kind = PopulationSpec::Kind::drawn;
    else if (pk == "explicit")
      cfg.population.kind = PopulationSpec::Kind::explicit_list;
    else
      bad("population.kind", "expected equal, drawn, or explicit");
    cfg.population.spread = jpop.value("spread", 0.0);
    cfg.population.seed = jpop.value("seed", cfg.population.seed);
    if (jpop.contains("classes"))
      cfg.population.classes = jpop["classes"].get<std::vector<int>>();
    if (jpop.contains("omegas"))
      cfg.population.omegas = jpop["omegas"].get<std::vector<double>>();
    if (!(cfg.population.spread >= 0.0) || cfg.population.spread >= 1.0)
      bad("population.spread", "must lie in [0,1)");
  }
  if (doc.contains("analysis")) {
    const auto& jan = doc["analysis"];
    if (jan.contains("eps"))
      cfg.analysis.eps_list = jan["eps"].get<std::vector<double>>();
    if (jan.contains("probe_omegas"))
      cfg.analysis.probe_omegas = jan["probe_omegas"].get<std::vector<double>>();
    if (jan.contains("n_sweep"))
      cfg.analysis.n_sweep = jan["n_sweep"].get<std::vector<int>>();
    for (double e : cfg.analysis.eps_list)
      if (!(e > 0.0)) bad("analysis.eps", "entries must be positive");
    for (int n : cfg.analysis.n_sweep)
      if (n < 1) bad("analysis.n_sweep", "entries must be positive agent counts");
  }
  if (doc.contains("simulation")) {
    const auto& jsim = doc["simulation"];
    cfg.simulation.n_paths = jsim.value("paths", cfg.simulation.n_paths);
    cfg.simulation.seed = jsim.value("seed", cfg.simulation.seed);
    const std::string mode = jsim.value("mode", std::string("exact-fraction"));
    if (mode == "exact-fraction")
      cfg.simulation.mode = EmploymentMode::exact_fraction;
    else if (mode == "independent")
      cfg.simulation.mode = EmploymentMode::independent;
    else
      bad("simulation.mode", "expected exact-fraction or independent");
    if (cfg.simulation.n_paths < 1) bad("simulation.paths", "must be >= 1");
  }
  cfg.allow_unconverged = doc.value("allow_unconverged", false);
  cfg.force = doc.value("force", false);
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

std::string scenario_to_json(const ScenarioConfig& cfg) {
  json doc;
  doc["spec_version"] = cfg.spec_version;
  doc["name"] = cfg.name;
  doc["params"] = {{"alpha", cfg.params.alpha}, {"beta", cfg.params.beta},
                   {"sigma", cfg.params.sigma}, {"delta", cfg.params.delta},
                   {"T", cfg.params.horizon},   {"N", cfg.params.n_agents},
                   {"Y1", cfg.params.y1},       {"L", cfg.params.labor_norm}};
  json jpr;
  jpr["min_unemp_prob"] = cfg.process.min_unemp_prob;
  if (cfg.process.z_ceiling > 0.0) jpr["z_max"] = cfg.process.z_ceiling;
  switch (cfg.process.kind) {
    case ProcessSpec::Kind::uniform_employment:
      jpr["kind"] = "uniform-employment";
      jpr["u"] = cfg.process.uniform.unemployment_rate;
      if (!cfg.process.uniform.shocks.empty()) jpr["shocks"] = cfg.process.uniform.shocks;
      break;
    case ProcessSpec::Kind::ks_markov: {
      jpr["kind"] = "ks-markov";
      const auto& ks = cfg.process.ks;
      jpr["z_good"] = ks.z_good;
      jpr["z_bad"] = ks.z_bad;
      jpr["p"] = {{ks.p[0][0], ks.p[0][1]}, {ks.p[1][0], ks.p[1][1]}};
      std::vector<double> pi;
      for (int s = 0; s < 2; ++s)
        for (int s2 = 0; s2 < 2; ++s2)
          for (int e = 0; e < 2; ++e)
            for (int e2 = 0; e2 < 2; ++e2) pi.push_back(ks.pi[s][s2][e][e2]);
      jpr["pi"] = pi;
      jpr["start"] = ks.start_state == 1 ? "bad" : "good";
      jpr["u0"] = ks.initial_unemployment;
      break;
    }
    case ProcessSpec::Kind::explicit_tree:
      jpr["kind"] = "explicit-tree";
      jpr["tree"] = explicit_tree_to_json(cfg.process.explicit_tree);
      break;
  }
  doc["process"] = std::move(jpr);
  doc["solver"] = {{"grid_points", cfg.solver.grid_points},
                   {"omega_min", cfg.solver.omega_min},
                   {"foc_tol", cfg.solver.foc_tol},
                   {"secant_polish", cfg.solver.secant_polish}};
  doc["auctioneer"] = {{"damping", cfg.clearing.damping},
                       {"max_iters", cfg.clearing.max_iters},
                       {"clearing_tol", cfg.clearing.tol},
                       {"enumeration_cap", cfg.clearing.enumeration_cap},
                       {"sample_paths", cfg.clearing.sample_paths}};
  json jpop;
  switch (cfg.population.kind) {
    case PopulationSpec::Kind::equal: jpop["kind"] = "equal"; break;
    case PopulationSpec::Kind::drawn: jpop["kind"] = "drawn"; break;
    case PopulationSpec::Kind::explicit_list: jpop["kind"] = "explicit"; break;
  }
  jpop["spread"] = cfg.population.spread;
  jpop["seed"] = cfg.population.seed;
  if (!cfg.population.classes.empty()) jpop["classes"] = cfg.population.classes;
  if (!cfg.population.omegas.empty()) jpop["omegas"] = cfg.population.omegas;
  doc["population"] = std::move(jpop);
  doc["analysis"] = {{"eps", cfg.analysis.eps_list},
                     {"probe_omegas", cfg.analysis.probe_omegas},
                     {"n_sweep", cfg.analysis.n_sweep}};
  doc["simulation"] = {
      {"paths", cfg.simulation.n_paths},
      {"seed", cfg.simulation.seed},
      {"mode", cfg.simulation.mode == EmploymentMode::independent ? "independent"
                                                                  : "exact-fraction"}};
  doc["allow_unconverged"] = cfg.allow_unconverged;
  doc["force"] = cfg.force;
  return doc.dump(2);
}

std::uint64_t scenario_hash(const ScenarioConfig& cfg) {
  // Canonical form: the round-tripped config minus volatile execution flags;
  // nlohmann dumps object keys sorted, which fixes the byte order.
  json doc = json::parse(scenario_to_json(cfg));
  doc.erase("allow_unconverged");
  doc.erase("force");
  const std::string canon = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a 64
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string scenario_hash_hex(const ScenarioConfig& cfg) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx",
                static_cast<unsigned long long>(scenario_hash(cfg)));
  return buf;
}

PopulationState build_population(const ScenarioConfig& cfg, const EventTree& tree) {
  const int n = cfg.params.n_agents;
  PopulationState pop;
  pop.node = tree.root();

  if (cfg.population.kind == PopulationSpec::Kind::explicit_list) {
    pop.class_of = cfg.population.classes;
    pop.omega = cfg.population.omegas;
    if (pop.class_of.empty())
      pop.class_of.assign(pop.omega.size(), 0);
    pop.validate(tree.classes.size());
    const double total = pop.total_wealth();
    if (std::abs(total - 1.0) > 1e-9)
      throw std::runtime_error("population: explicit omegas must sum to 1");
    return pop;
  }

  // Class assignment: uniform-employment economies have one class; ks-markov
  // splits by initial employment status with class sizes from u0.
  pop.class_of.assign(static_cast<std::size_t>(n), 0);
  if (tree.classes.size() == 2) {
    const int employed = static_cast<int>(std::lround(
        (1.0 - cfg.process.ks.initial_unemployment) * static_cast<double>(n)));
    for (int j = employed; j < n; ++j) pop.class_of[static_cast<std::size_t>(j)] = 1;
  }

  pop.omega.assign(static_cast<std::size_t>(n), 0.0);
  if (cfg.population.kind == PopulationSpec::Kind::equal) {
    for (double& w : pop.omega) w = 1.0 / static_cast<double>(n);
    return pop;
  }

  // kind == drawn: s_j0 equal up to a deterministic jitter, normalized to 1;
  // period-1 employment from the class structure (employed agents split the
  // wage bill evenly).
  std::vector<double> s0(static_cast<std::size_t>(n), 1.0);
  if (cfg.population.spread > 0.0) {
    RngStream rng(cfg.population.seed, 0, 0);
    double total = 0.0;
    for (double& s : s0) {
      s = 1.0 + cfg.population.spread * (2.0 * rng.next_double() - 1.0);
      total += s;
    }
    for (double& s : s0) s /= total;
  } else {
    for (double& s : s0) s = 1.0 / static_cast<double>(n);
  }

  std::vector<double> e1(static_cast<std::size_t>(n), 0.0);
  if (tree.classes.size() == 2) {
    int employed = 0;
    for (int cl : pop.class_of)
      if (cl == 0) ++employed;
    if (employed > 0)
      for (std::size_t j = 0; j < pop.class_of.size(); ++j)
        if (pop.class_of[j] == 0) e1[j] = 1.0 / static_cast<double>(employed);
  } else {
    // Draw period-1 employment from the class's first-edge distribution
    // (exact fraction) if one exists; otherwise everyone works equally.
    RngStream rng(cfg.population.seed, 1, 0);
    if (tree.nodes.size() > 1) {
      e1 = draw_employment(tree, tree.nodes[0].children.empty() ? 1 : tree.nodes[0].children[0],
                           pop.class_of, EmploymentMode::exact_fraction, rng);
    } else {
      for (double& e : e1) e = 1.0 / static_cast<double>(n);
    }
  }

  for (std::size_t j = 0; j < pop.omega.size(); ++j)
    pop.omega[j] = (1.0 - cfg.params.alpha) * e1[j] + cfg.params.alpha * s0[j];
  return pop;
}

}  // namespace growthlab
