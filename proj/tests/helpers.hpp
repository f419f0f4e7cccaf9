#pragma once

// Shared fixtures for the test suites: hand-built explicit trees with known
// closed forms, fixed forecast profiles, and a one-call policy solve under
// frozen forecasts (so policy tests are independent of market clearing).

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "growthlab/aggregates.hpp"
#include "growthlab/bounds.hpp"
#include "growthlab/econ.hpp"
#include "growthlab/event_tree.hpp"
#include "growthlab/solver.hpp"

namespace testlab {

using namespace growthlab;

// Single-branch chain of `horizon` nodes; every edge carries the same
// employment distribution for the sole prospects class.
inline EventTree chain_tree(int horizon, std::vector<double> support,
                            std::vector<double> prob,
                            std::vector<double> shocks = {}) {
  EventTree tree;
  tree.nodes.resize(static_cast<std::size_t>(horizon));
  double z_top = 1.0;
  for (int t = 0; t < horizon; ++t) {
    TreeNode& n = tree.nodes[static_cast<std::size_t>(t)];
    n.id = t;
    n.period = t + 1;
    n.shock = shocks.empty() ? 1.0 : shocks[static_cast<std::size_t>(t)];
    z_top = std::max(z_top, n.shock);
    n.parent = t - 1;
    if (t + 1 < horizon) {
      n.children = {t + 1};
      n.child_prob = {1.0};
    }
  }
  ProspectsClass cl;
  cl.name = "chain";
  cl.edge_dist.resize(tree.nodes.size());
  for (std::size_t i = 1; i < tree.nodes.size(); ++i)
    cl.edge_dist[i] = EmploymentDistribution{support, prob};
  tree.classes.push_back(std::move(cl));
  tree.z_max = 10.0 * z_top;
  tree.validate_structure();
  return tree;
}

// Degenerate no-employment economy: every agent's wage share is surely 0.
inline EventTree no_employment_chain(int horizon) {
  return chain_tree(horizon, {0.0}, {1.0});
}

// Two-point employment chain: unemployed w.p. u, else the given share.
inline EventTree two_point_chain(int horizon, double u, double employed_share) {
  return chain_tree(horizon, {0.0, employed_share}, {u, 1.0 - u});
}

// Full binary aggregate tree: every non-terminal node branches into a high
// and a low productivity child with equal odds; one class faces the same
// two-point employment distribution on every edge.
inline EventTree binary_tree(int horizon, double u, double employed_share,
                             double z_hi = 1.05, double z_lo = 0.95) {
  EventTree tree;
  tree.nodes.push_back(TreeNode{0, 1, 1.0, -1, {}, {}});
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    if (tree.nodes[i].period >= horizon) continue;
    for (double z : {z_hi, z_lo}) {
      const int id = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(TreeNode{id, tree.nodes[i].period + 1, z,
                                    static_cast<int>(i), {}, {}});
      tree.nodes[i].children.push_back(id);
      tree.nodes[i].child_prob.push_back(0.5);
    }
  }
  ProspectsClass cl;
  cl.name = "binary";
  cl.edge_dist.resize(tree.nodes.size());
  for (std::size_t i = 1; i < tree.nodes.size(); ++i)
    cl.edge_dist[i] =
        EmploymentDistribution{{0.0, employed_share}, {u, 1.0 - u}};
  tree.classes.push_back(std::move(cl));
  tree.z_max = 10.0 * std::max({1.0, z_hi, z_lo});
  tree.validate_structure();
  return tree;
}

// Fixed forecast profile: Omega = value at every non-terminal node.
inline Forecasts flat_forecasts(const EventTree& tree, double value) {
  Forecasts f;
  f.omega.assign(tree.nodes.size(), 0.0);
  for (const TreeNode& n : tree.nodes)
    if (!n.children.empty()) f.omega[static_cast<std::size_t>(n.id)] = value;
  return f;
}

// Plausible interior forecast profile, independent of any solve: the
// closed-form log-utility no-employment savings rates per node.
inline Forecasts log_bound_forecasts(const EventTree& tree, const EconomyParams& p) {
  Forecasts f;
  f.omega = gamma_upper_bound_log(tree, p);
  return f;
}

// Policy of one class under frozen forecasts, bundled with the aggregates it
// was solved against.  Stable storage so AgentProblem pointers stay valid.
struct SolvedClass {
  EconomyParams params;
  Forecasts forecasts;
  NodeAggregates agg;
  Policy policy;
  SolveReport report;

  AgentProblem problem(const EventTree& tree, int class_id = 0) const {
    return AgentProblem{&tree, &params, &forecasts, &agg, class_id};
  }
};

inline SolvedClass solve_fixed(const EventTree& tree, const EconomyParams& params,
                               const Forecasts& forecasts, int class_id = 0,
                               SolverOptions opts = {}) {
  SolvedClass out;
  out.params = params;
  out.forecasts = forecasts;
  out.agg = propagate_aggregates(tree, params, forecasts);
  AgentProblem pb{&tree, &out.params, &out.forecasts, &out.agg, class_id};
  auto solved = solve_policy(pb, opts);
  out.policy = std::move(solved.first);
  out.report = solved.second;
  return out;
}

// Geometric-sum closed form for the log-utility no-employment savings rate
// with h periods to go: 1 - gbar_h = 1 / (1 + beta + ... + beta^(h-1)).
inline double log_gbar_closed_form(double beta, int remaining) {
  double denom = 0.0;
  for (int k = 0; k < remaining; ++k) denom += std::pow(beta, k);
  return 1.0 - 1.0 / denom;
}

}  // namespace testlab
