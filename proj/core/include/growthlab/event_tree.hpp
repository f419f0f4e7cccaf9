#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace growthlab {

// Finite-support distribution of employment shares (shares of the wage bill,
// values in [0,1]) faced by one prospects class on one tree edge.
struct EmploymentDistribution {
  std::vector<double> support;
  std::vector<double> prob;

  double mass_at(double value) const;
  double mass_at_zero() const { return mass_at(0.0); }
  double max_support() const;
  void validate() const;  // throws std::invalid_argument
};

struct TreeNode {
  int id = 0;
  int period = 1;                  // t in 1..T; root has period 1
  double shock = 1.0;              // productivity z at this node
  int parent = -1;                 // -1 for the root
  std::vector<int> children;       // node ids
  std::vector<double> child_prob;  // conditional branch probabilities, sum to 1
};

// A similar-future-prospects class: agents in the same class face identical
// employment-share distributions on every edge of the tree.  edge_dist is
// indexed by child node id (each non-root node has exactly one incoming edge);
// the root slot is unused.
struct ProspectsClass {
  std::string name;
  std::vector<EmploymentDistribution> edge_dist;
};

struct EventTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root; ids equal indices
  std::vector<ProspectsClass> classes;
  double z_max = 0.0;  // productivity ceiling recorded with the tree

  int root() const { return 0; }
  int depth() const;  // max period = T
  bool is_terminal(int node) const { return nodes[node].children.empty(); }
  std::vector<int> nodes_at_period(int t) const;
  // probability of reaching `node` from the root
  double path_probability(int node) const;

  // Structural invariants: ids match indices, parents precede children,
  // branch probabilities sum to 1, every class has a distribution on every
  // edge, supports lie in [0,1], shocks positive and <= z_max.
  void validate_structure() const;  // throws std::invalid_argument
};

// ---------------------------------------------------------------------------
// Process specifications from which trees are built.

// Uniform employment risk: a single class; on every edge each agent is
// unemployed with probability u and otherwise receives the equal share
// 1/((1-u)*N) of the wage bill.  Aggregate productivity follows the given
// per-period values (default: constant 1, a single-branch chain).
struct UniformEmploymentSpec {
  double unemployment_rate = 0.1;  // u in (0,1)
  std::vector<double> shocks;      // per-period z; empty means all 1.0
};

// Two-state aggregate chain (good/bad) with joint aggregate-idiosyncratic
// transition probabilities pi[s][s'][e][e'] (e: 0 unemployed, 1 employed).
// Rows satisfy sum_{e'} pi[s][s'][e][e'] == p[s][s'] for each (s,s',e), so
// pi/p are the conditional employment transition probabilities.  Classes are
// formed by initial employment status; per-edge class distributions are the
// forward-marginalized employment probabilities given the aggregate path.
struct KsMarkovSpec {
  double z_good = 1.05;
  double z_bad = 0.95;
  std::array<std::array<double, 2>, 2> p{};       // p[s][s'], rows sum to 1
  double pi[2][2][2][2] = {};                     // joint, see above
  int start_state = 0;                            // 0 = good, 1 = bad
  double initial_unemployment = 0.1;              // fixes class sizes at t=1
};

struct ProcessSpec {
  enum class Kind { uniform_employment, ks_markov, explicit_tree };
  Kind kind = Kind::uniform_employment;
  UniformEmploymentSpec uniform;
  KsMarkovSpec ks;
  EventTree explicit_tree;       // used when kind == explicit_tree
  double min_unemp_prob = 0.05;  // c: required mass at e == 0 per edge
  double z_ceiling = 0.0;        // 0 means default: 10 x largest shock used
};

// Build the event tree for `horizon` periods and `n_agents` agents.
// For explicit trees the input tree is validated and passed through
// (z_max filled in if absent).
EventTree build_event_tree(const ProcessSpec& spec, int horizon, int n_agents);

// ---------------------------------------------------------------------------
// Risk-of-unemployment validation (mass at e == 0 must be >= c on every edge
// for every class).

struct ValidationIssue {
  int class_id;
  int child_node;  // edge parent(child) -> child
  double mass_at_zero;
};

struct ValidationReport {
  bool pass = true;
  double required_mass = 0.0;
  std::vector<ValidationIssue> offenders;  // edges violating the condition
  std::string summary() const;
};

ValidationReport validate_process(const EventTree& tree, double min_unemp_prob);

}  // namespace growthlab
