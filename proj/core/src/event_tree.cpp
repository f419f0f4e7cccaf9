#include "growthlab/event_tree.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace growthlab {

namespace {
constexpr double kProbTol = 1e-12;

void fail(const std::string& msg) { throw std::invalid_argument(msg); }
}  // namespace

double EmploymentDistribution::mass_at(double value) const {
  double m = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i)
    if (support[i] == value) m += prob[i];
  return m;
}

double EmploymentDistribution::max_support() const {
  double m = 0.0;
  for (double s : support) m = std::max(m, s);
  return m;
}

void EmploymentDistribution::validate() const {
  if (support.empty()) fail("EmploymentDistribution: empty support");
  if (support.size() != prob.size())
    fail("EmploymentDistribution: support/prob size mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (!(support[i] >= 0.0) || !(support[i] <= 1.0))
      fail("EmploymentDistribution: support values must lie in [0,1]");
    if (!(prob[i] >= 0.0)) fail("EmploymentDistribution: negative probability");
    total += prob[i];
  }
  if (std::abs(total - 1.0) > kProbTol)
    fail("EmploymentDistribution: probabilities must sum to 1");
}

int EventTree::depth() const {
  int d = 0;
  for (const auto& n : nodes) d = std::max(d, n.period);
  return d;
}

std::vector<int> EventTree::nodes_at_period(int t) const {
  std::vector<int> out;
  for (const auto& n : nodes)
    if (n.period == t) out.push_back(n.id);
  return out;
}

double EventTree::path_probability(int node) const {
  double p = 1.0;
  int cur = node;
  while (nodes[cur].parent >= 0) {
    const TreeNode& par = nodes[nodes[cur].parent];
    const auto it = std::find(par.children.begin(), par.children.end(), cur);
    p *= par.child_prob[static_cast<std::size_t>(it - par.children.begin())];
    cur = par.id;
  }
  return p;
}

void EventTree::validate_structure() const {
  if (nodes.empty()) fail("EventTree: no nodes");
  if (nodes[0].parent != -1 || nodes[0].period != 1)
    fail("EventTree: node 0 must be the period-1 root");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TreeNode& n = nodes[i];
    if (n.id != static_cast<int>(i)) fail("EventTree: node id does not match index");
    if (i > 0) {
      if (n.parent < 0 || n.parent >= static_cast<int>(i))
        fail("EventTree: parents must precede children");
      if (n.period != nodes[n.parent].period + 1)
        fail("EventTree: child period must be parent period + 1");
      const auto& sibs = nodes[n.parent].children;
      if (std::find(sibs.begin(), sibs.end(), n.id) == sibs.end())
        fail("EventTree: node missing from its parent's child list");
    }
    if (!(n.shock > 0.0)) fail("EventTree: shocks must be positive");
    if (z_max > 0.0 && n.shock > z_max) fail("EventTree: shock exceeds z_max");
    if (n.children.size() != n.child_prob.size())
      fail("EventTree: children/child_prob size mismatch");
    if (!n.children.empty()) {
      double total = 0.0;
      for (double p : n.child_prob) {
        if (!(p >= 0.0)) fail("EventTree: negative branch probability");
        total += p;
      }
      if (std::abs(total - 1.0) > kProbTol)
        fail("EventTree: branch probabilities must sum to 1");
    }
  }
  if (classes.empty()) fail("EventTree: at least one prospects class required");
  for (const auto& cl : classes) {
    if (cl.edge_dist.size() != nodes.size())
      fail("EventTree: class edge_dist must have one entry per node");
    for (std::size_t i = 1; i < nodes.size(); ++i) cl.edge_dist[i].validate();
  }
}

namespace {

EventTree build_uniform(const UniformEmploymentSpec& u, int horizon, int n_agents) {
  if (!(u.unemployment_rate > 0.0) || !(u.unemployment_rate < 1.0))
    fail("uniform-employment: unemployment rate must lie in (0,1)");
  if (!u.shocks.empty() && static_cast<int>(u.shocks.size()) != horizon)
    fail("uniform-employment: shocks must list one value per period");
  EventTree tree;
  tree.nodes.resize(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) {
    TreeNode& n = tree.nodes[static_cast<std::size_t>(t)];
    n.id = t;
    n.period = t + 1;
    n.shock = u.shocks.empty() ? 1.0 : u.shocks[static_cast<std::size_t>(t)];
    n.parent = t - 1;
    if (t + 1 < horizon) {
      n.children = {t + 1};
      n.child_prob = {1.0};
    }
  }
  const double employed_share =
      1.0 / ((1.0 - u.unemployment_rate) * static_cast<double>(n_agents));
  ProspectsClass cl;
  cl.name = "workers";
  cl.edge_dist.resize(tree.nodes.size());
  for (std::size_t i = 1; i < tree.nodes.size(); ++i)
    cl.edge_dist[i] = EmploymentDistribution{
        {0.0, employed_share}, {u.unemployment_rate, 1.0 - u.unemployment_rate}};
  tree.classes.push_back(std::move(cl));
  return tree;
}

EventTree build_ks(const KsMarkovSpec& ks, int horizon, int n_agents) {
  for (int s = 0; s < 2; ++s) {
    double row = ks.p[s][0] + ks.p[s][1];
    if (std::abs(row - 1.0) > kProbTol) fail("ks-markov: rows of p must sum to 1");
    for (int s2 = 0; s2 < 2; ++s2) {
      if (!(ks.p[s][s2] >= 0.0)) fail("ks-markov: negative aggregate probability");
      for (int e = 0; e < 2; ++e) {
        const double joint = ks.pi[s][s2][e][0] + ks.pi[s][s2][e][1];
        if (ks.p[s][s2] > 0.0 && std::abs(joint - ks.p[s][s2]) > 1e-10)
          fail("ks-markov: sum_{e'} pi[s][s'][e][e'] must equal p[s][s']");
        if (ks.pi[s][s2][e][0] < 0.0 || ks.pi[s][s2][e][1] < 0.0)
          fail("ks-markov: negative joint probability");
      }
    }
  }
  if (!(ks.z_good > 0.0) || !(ks.z_bad > 0.0)) fail("ks-markov: shocks must be positive");
  if (ks.z_good <= ks.z_bad) fail("ks-markov: z_good must exceed z_bad");
  if (ks.start_state != 0 && ks.start_state != 1) fail("ks-markov: start_state must be 0 or 1");
  if (!(ks.initial_unemployment >= 0.0) || !(ks.initial_unemployment < 1.0))
    fail("ks-markov: initial unemployment must lie in [0,1)");

  EventTree tree;
  struct Pending {
    int state;  // 0 good, 1 bad
    // marginal employment probability per class at this node
    std::array<double, 2> p_emp;
  };
  std::vector<Pending> meta;

  const int n1 = static_cast<int>(
      std::lround((1.0 - ks.initial_unemployment) * static_cast<double>(n_agents)));
  const int n2 = n_agents - n1;
  const double size1 = static_cast<double>(n1);
  const double size2 = static_cast<double>(n2);

  tree.nodes.push_back(TreeNode{0, 1, ks.start_state == 0 ? ks.z_good : ks.z_bad, -1, {}, {}});
  meta.push_back(Pending{ks.start_state, {1.0, 0.0}});  // class 0 employed, class 1 unemployed

  tree.classes.resize(2);
  tree.classes[0].name = "initially-employed";
  tree.classes[1].name = "initially-unemployed";

  for (int t = 1; t < horizon; ++t) {
    const auto level = tree.nodes.size();
    for (std::size_t i = 0; i < level; ++i) {
      if (tree.nodes[i].period != t) continue;
      const int s = meta[i].state;
      for (int s2 = 0; s2 < 2; ++s2) {
        if (ks.p[s][s2] <= 0.0) continue;  // prune zero-probability branches
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back(
            TreeNode{id, t + 1, s2 == 0 ? ks.z_good : ks.z_bad, static_cast<int>(i), {}, {}});
        tree.nodes[i].children.push_back(id);
        tree.nodes[i].child_prob.push_back(ks.p[s][s2]);
        // conditional employment transition given the aggregate move s -> s2
        const double stay = ks.pi[s][s2][1][1] / ks.p[s][s2];  // employed -> employed
        const double gain = ks.pi[s][s2][0][1] / ks.p[s][s2];  // unemployed -> employed
        Pending next{s2, {}};
        for (int cl = 0; cl < 2; ++cl) {
          const double pe = meta[i].p_emp[static_cast<std::size_t>(cl)];
          next.p_emp[static_cast<std::size_t>(cl)] = pe * stay + (1.0 - pe) * gain;
        }
        meta.push_back(next);
      }
    }
  }

  // Per-edge distributions: employed agents split the wage bill evenly; the
  // equal share uses the expected number employed across both classes so that
  // expected shares sum to 1.
  for (auto& cl : tree.classes) cl.edge_dist.resize(tree.nodes.size());
  for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
    const double expected_employed = size1 * meta[i].p_emp[0] + size2 * meta[i].p_emp[1];
    if (!(expected_employed > 0.0))
      fail("ks-markov: expected employment vanished along a branch");
    const double share = 1.0 / expected_employed;
    for (int cl = 0; cl < 2; ++cl) {
      const double pe = meta[i].p_emp[static_cast<std::size_t>(cl)];
      tree.classes[static_cast<std::size_t>(cl)].edge_dist[i] =
          EmploymentDistribution{{0.0, share}, {1.0 - pe, pe}};
    }
  }
  return tree;
}

}  // namespace

EventTree build_event_tree(const ProcessSpec& spec, int horizon, int n_agents) {
  if (horizon < 1) fail("build_event_tree: horizon must be at least 1");
  if (n_agents < 1) fail("build_event_tree: n_agents must be at least 1");
  EventTree tree;
  switch (spec.kind) {
    case ProcessSpec::Kind::uniform_employment:
      tree = build_uniform(spec.uniform, horizon, n_agents);
      break;
    case ProcessSpec::Kind::ks_markov:
      tree = build_ks(spec.ks, horizon, n_agents);
      break;
    case ProcessSpec::Kind::explicit_tree:
      tree = spec.explicit_tree;
      if (tree.depth() != horizon)
        fail("build_event_tree: explicit tree depth does not match horizon");
      break;
  }
  if (spec.z_ceiling > 0.0) {
    tree.z_max = spec.z_ceiling;
  } else if (tree.z_max <= 0.0) {
    double largest = 0.0;
    for (const auto& n : tree.nodes) largest = std::max(largest, n.shock);
    tree.z_max = 10.0 * largest;  // default ceiling
  }
  tree.validate_structure();
  return tree;
}

std::string ValidationReport::summary() const {
  std::ostringstream os;
  os << (pass ? "PASS" : "FAIL") << ": risk-of-unemployment requires mass >= "
     << required_mass << " at e=0 on every edge";
  if (!pass) os << "; " << offenders.size() << " offending edge(s)";
  return os.str();
}

ValidationReport validate_process(const EventTree& tree, double min_unemp_prob) {
  ValidationReport report;
  report.required_mass = min_unemp_prob;
  for (std::size_t cl = 0; cl < tree.classes.size(); ++cl) {
    for (std::size_t i = 1; i < tree.nodes.size(); ++i) {
      const double mass = tree.classes[cl].edge_dist[i].mass_at_zero();
      if (mass < min_unemp_prob) {
        report.pass = false;
        report.offenders.push_back(
            ValidationIssue{static_cast<int>(cl), static_cast<int>(i), mass});
      }
    }
  }
  return report;
}

}  // namespace growthlab
