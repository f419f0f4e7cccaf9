#include "growthlab/policy.hpp"

#include <nlohmann/json.hpp>
#include <stdexcept>

namespace growthlab {

using nlohmann::json;

double Policy::eval(int node, double omega, bool* clamped) const {
  const auto i = static_cast<std::size_t>(node);
  if (clamped) *clamped = false;
  if (gamma[i].empty()) return 0.0;  // terminal: consume everything
  const auto& g = grids[i].points;
  if (omega <= g.front()) {
    if (clamped && omega < g.front()) *clamped = true;
    return gamma[i].front();
  }
  if (omega >= g.back()) {
    if (clamped && omega > g.back()) *clamped = true;
    return gamma[i].back();
  }
  const std::size_t seg = grids[i].bracket(omega);
  return pchip_eval(g, gamma[i], slopes[i], seg, omega);
}

double Policy::eval_derivative(int node, double omega) const {
  const auto i = static_cast<std::size_t>(node);
  if (gamma[i].empty()) return 0.0;
  const auto& g = grids[i].points;
  if (omega <= g.front() || omega >= g.back()) return 0.0;
  const std::size_t seg = grids[i].bracket(omega);
  return pchip_eval_derivative(g, gamma[i], slopes[i], seg, omega);
}

void Policy::finalize_node(int node) {
  const auto i = static_cast<std::size_t>(node);
  slopes[i] = gamma[i].empty() ? std::vector<double>{}
                               : pchip_slopes(grids[i].points, gamma[i]);
}

std::string policy_to_json(const Policy& policy) {
  json doc;
  doc["schema_version"] = 1;
  doc["kind"] = "growthlab-policy";
  doc["class_id"] = policy.class_id;
  doc["scenario_hash"] = policy.scenario_hash;
  doc["foc_tol"] = policy.foc_tol;
  doc["interp"] = policy.interp;
  json nodes = json::array();
  for (std::size_t i = 0; i < policy.gamma.size(); ++i) {
    json n;
    n["node"] = i;
    n["grid"] = policy.gamma[i].empty() ? std::vector<double>{} : policy.grids[i].points;
    n["gamma"] = policy.gamma[i];
    nodes.push_back(std::move(n));
  }
  doc["nodes"] = std::move(nodes);
  return doc.dump(2);
}

Policy policy_from_json(const std::string& text, std::uint64_t expected_hash) {
  json doc = json::parse(text);
  if (!doc.contains("schema_version") || doc["schema_version"].get<int>() != 1)
    throw std::runtime_error("policy_from_json: unsupported schema version");
  if (doc.value("kind", std::string{}) != "growthlab-policy")
    throw std::runtime_error("policy_from_json: not a policy artifact");
  Policy p;
  p.class_id = doc["class_id"].get<int>();
  p.scenario_hash = doc["scenario_hash"].get<std::uint64_t>();
  if (expected_hash != 0 && p.scenario_hash != expected_hash)
    throw std::runtime_error("policy_from_json: scenario hash mismatch");
  p.foc_tol = doc["foc_tol"].get<double>();
  p.interp = doc["interp"].get<std::string>();
  const auto& nodes = doc["nodes"];
  p.grids.resize(nodes.size());
  p.gamma.resize(nodes.size());
  p.slopes.resize(nodes.size());
  for (const auto& n : nodes) {
    const auto i = n["node"].get<std::size_t>();
    if (i >= p.gamma.size()) throw std::runtime_error("policy_from_json: node out of range");
    p.grids[i].points = n["grid"].get<std::vector<double>>();
    p.gamma[i] = n["gamma"].get<std::vector<double>>();
    p.finalize_node(static_cast<int>(i));
  }
  return p;
}

}  // namespace growthlab
