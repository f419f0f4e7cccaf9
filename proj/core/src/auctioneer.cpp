#include "growthlab/auctioneer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "growthlab/bounds.hpp"
#include "growthlab/employment.hpp"

namespace growthlab {

namespace {

struct WeightedState {
  double omega;
  double prob;
};

// Exact expected residuals by per-agent enumeration of employment outcomes.
ClearingResiduals residuals_exact(const EventTree& tree, const EconomyParams& params,
                                  const Forecasts& forecasts, const NodeAggregates& agg,
                                  const PopulationState& root_pop,
                                  const std::vector<const Policy*>& policies) {
  const std::size_t n_nodes = tree.nodes.size();
  ClearingResiduals out;
  out.residual.assign(n_nodes, 0.0);
  std::vector<double> demand(n_nodes, 0.0);  // sum_j E[gamma * omega]

  for (std::size_t j = 0; j < root_pop.size(); ++j) {
    const Policy& pol = *policies[static_cast<std::size_t>(root_pop.class_of[j])];
    const auto& cls = tree.classes[static_cast<std::size_t>(root_pop.class_of[j])];
    std::vector<std::vector<WeightedState>> states(n_nodes);
    states[0] = {WeightedState{root_pop.omega[j], 1.0}};
    for (std::size_t i = 0; i < n_nodes; ++i) {
      if (states[i].empty()) continue;
      const TreeNode& node = tree.nodes[i];
      const bool terminal = tree.is_terminal(node.id);
      double agent_demand = 0.0;
      for (const auto& st : states[i]) {
        if (terminal) continue;
        agent_demand += st.prob * pol.eval(node.id, st.omega) * st.omega;
      }
      demand[i] += agent_demand;
      out.states += states[i].size();
      if (terminal) continue;
      const double om = forecasts.omega[i];
      for (int child : node.children) {
        const auto c = static_cast<std::size_t>(child);
        const auto& dist = cls.edge_dist[c];
        auto& next = states[c];
        next.reserve(next.size() + states[i].size() * dist.support.size());
        for (const auto& st : states[i]) {
          const double invest =
              params.alpha * pol.eval(node.id, st.omega) * st.omega / om;
          for (std::size_t k = 0; k < dist.support.size(); ++k) {
            if (dist.prob[k] == 0.0) continue;
            const double e_eff = dist.support[k] * agg.wage_scale[c];
            next.push_back(WeightedState{
                invest + (1.0 - params.alpha) * e_eff, st.prob * dist.prob[k]});
          }
        }
      }
      states[i].clear();
      states[i].shrink_to_fit();
    }
  }
  for (std::size_t i = 0; i < n_nodes; ++i)
    if (!tree.is_terminal(static_cast<int>(i)))
      out.residual[i] = demand[i] / forecasts.omega[i] - 1.0;
  return out;
}

// Sampled residuals: joint employment realizations drawn down every
// root-to-leaf aggregate path; per-node mean and standard error of the
// realized excess demand.
ClearingResiduals residuals_sampled(const EventTree& tree, const EconomyParams& params,
                                    const Forecasts& forecasts, const NodeAggregates& agg,
                                    const PopulationState& root_pop,
                                    const std::vector<const Policy*>& policies,
                                    const ClearingOptions& opts) {
  const std::size_t n_nodes = tree.nodes.size();
  ClearingResiduals out;
  out.sampled = true;
  out.residual.assign(n_nodes, 0.0);
  out.std_error.assign(n_nodes, 0.0);
  // Welford accumulators: numerically stable, and a degenerate sample
  // (every path identical) yields a variance of exactly zero.
  std::vector<double> mean(n_nodes, 0.0), m2(n_nodes, 0.0);
  std::vector<long> count(n_nodes, 0);

  // Enumerate aggregate paths root -> leaf.
  std::vector<std::vector<int>> paths;
  std::vector<std::vector<int>> agenda{{0}};
  while (!agenda.empty()) {
    auto path = agenda.back();
    agenda.pop_back();
    const int tail = path.back();
    if (tree.is_terminal(tail)) {
      paths.push_back(path);
      continue;
    }
    for (int child : tree.nodes[static_cast<std::size_t>(tail)].children) {
      auto ext = path;
      ext.push_back(child);
      agenda.push_back(std::move(ext));
    }
  }

  const std::size_t n = root_pop.size();
  for (std::size_t p = 0; p < paths.size(); ++p) {
    for (int rep = 0; rep < opts.sample_paths; ++rep) {
      std::vector<double> omegas = root_pop.omega;
      for (std::size_t step = 0; step < paths[p].size(); ++step) {
        const int node = paths[p][step];
        const auto i = static_cast<std::size_t>(node);
        if (tree.is_terminal(node)) break;
        double excess = 0.0;
        std::vector<double> invest(n);
        for (std::size_t j = 0; j < n; ++j) {
          const Policy& pol = *policies[static_cast<std::size_t>(root_pop.class_of[j])];
          const double s = pol.eval(node, omegas[j]) * omegas[j] / forecasts.omega[i];
          excess += s;
          invest[j] = params.alpha * s;
        }
        const double r = excess - 1.0;
        count[i]++;
        const double delta = r - mean[i];
        mean[i] += delta / static_cast<double>(count[i]);
        m2[i] += delta * (r - mean[i]);
        if (step + 1 >= paths[p].size()) break;
        const int child = paths[p][step + 1];
        RngStream rng(opts.seed, p * 1000003ULL + static_cast<std::uint64_t>(rep),
                      static_cast<std::uint64_t>(child));
        const auto shares = draw_employment(tree, child, root_pop.class_of,
                                            EmploymentMode::exact_fraction, rng);
        const double ws = agg.wage_scale[static_cast<std::size_t>(child)];
        for (std::size_t j = 0; j < n; ++j)
          omegas[j] = invest[j] + (1.0 - params.alpha) * shares[j] * ws;
      }
    }
  }
  for (std::size_t i = 0; i < n_nodes; ++i) {
    if (count[i] == 0) continue;
    out.residual[i] = mean[i];
    if (count[i] > 1) {
      const double var = std::max(0.0, m2[i]) /
                         static_cast<double>(count[i] - 1);
      out.std_error[i] = std::sqrt(var / static_cast<double>(count[i]));
    }
  }
  return out;
}

std::uint64_t enumeration_size(const EventTree& tree, const PopulationState& pop) {
  // Per-agent state counts grow by the employment support size along each
  // edge; total work is the sum over nodes weighted by class populations.
  std::vector<std::uint64_t> per_class_total(tree.classes.size(), 0);
  for (std::size_t cl = 0; cl < tree.classes.size(); ++cl) {
    std::vector<std::uint64_t> states(tree.nodes.size(), 0);
    states[0] = 1;
    std::uint64_t total = 1;
    for (const TreeNode& node : tree.nodes) {
      const auto i = static_cast<std::size_t>(node.id);
      if (states[i] == 0) continue;
      for (int child : node.children) {
        const auto c = static_cast<std::size_t>(child);
        const auto supp = tree.classes[cl].edge_dist[c].support.size();
        states[c] = states[i] * supp;
        total += states[c];
      }
    }
    per_class_total[cl] = total;
  }
  std::uint64_t work = 0;
  for (std::size_t j = 0; j < pop.size(); ++j)
    work += per_class_total[static_cast<std::size_t>(pop.class_of[j])];
  return work;
}

}  // namespace

double residual_from_shares(const std::vector<double>& desired_shares) {
  return std::accumulate(desired_shares.begin(), desired_shares.end(), 0.0) - 1.0;
}

ClearingResiduals clearing_residuals(const EventTree& tree, const EconomyParams& params,
                                     const Forecasts& forecasts, const NodeAggregates& agg,
                                     const PopulationState& root_pop,
                                     const std::vector<const Policy*>& policies,
                                     const ClearingOptions& opts) {
  root_pop.validate(tree.classes.size());
  if (policies.size() != tree.classes.size())
    throw std::invalid_argument("clearing_residuals: one policy per class required");
  if (enumeration_size(tree, root_pop) <= opts.enumeration_cap)
    return residuals_exact(tree, params, forecasts, agg, root_pop, policies);
  return residuals_sampled(tree, params, forecasts, agg, root_pop, policies, opts);
}

std::pair<Forecasts, ClearingReport> solve_forecasts(
    const EventTree& tree, const EconomyParams& params, const PopulationState& root_pop,
    const SolverOptions& solver_opts, const ClearingOptions& opts,
    const Forecasts* initial) {
  const std::size_t n_nodes = tree.nodes.size();
  ClearingReport report;
  report.damping = opts.damping;

  Forecasts fc;
  if (initial) {
    fc = *initial;
    if (fc.omega.size() != n_nodes)
      throw std::invalid_argument("solve_forecasts: initial forecast size mismatch");
  } else {
    // Seed with the no-employment upper bounds: exact closed form for the
    // log case, then one refinement through the sigma-specific recursion.
    fc.omega = gamma_upper_bound_log(tree, params);
    for (double& om : fc.omega)
      om = std::clamp(om, opts.omega_floor, 1.0 - opts.omega_floor);
    if (!params.log_utility()) {
      for (int pass = 0; pass < 2; ++pass) {
        const NodeAggregates agg = propagate_aggregates(tree, params, fc);
        std::vector<double> ub = gamma_upper_bound(tree, params, fc, agg);
        for (std::size_t i = 0; i < n_nodes; ++i)
          if (!tree.is_terminal(static_cast<int>(i)))
            fc.omega[i] = std::clamp(ub[i], opts.omega_floor, 1.0 - opts.omega_floor);
      }
    }
  }
  // Zero (ignored) entries at terminal nodes keep artifacts tidy.
  for (std::size_t i = 0; i < n_nodes; ++i)
    if (tree.is_terminal(static_cast<int>(i))) fc.omega[i] = 0.0;

  std::vector<Policy> policies(tree.classes.size());
  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    const NodeAggregates agg = propagate_aggregates(tree, params, fc);
    std::vector<const Policy*> views(tree.classes.size());
    for (std::size_t cl = 0; cl < tree.classes.size(); ++cl) {
      AgentProblem pb{&tree, &params, &fc, &agg, static_cast<int>(cl)};
      policies[cl] = solve_policy(pb, solver_opts).first;
      views[cl] = &policies[cl];
    }
    const ClearingResiduals res =
        clearing_residuals(tree, params, fc, agg, root_pop, views, opts);
    double max_abs = 0.0;
    for (std::size_t i = 0; i < n_nodes; ++i)
      if (!tree.is_terminal(static_cast<int>(i)))
        max_abs = std::max(max_abs, std::abs(res.residual[i]));
    report.iterations = iter;
    report.residual_history.push_back(max_abs);
    report.residuals = res.residual;
    report.max_residual = max_abs;
    report.sampled = res.sampled;
    report.std_error = res.std_error;
    if (max_abs <= opts.tol) {
      report.converged = true;
      break;
    }
    if (iter == opts.max_iters) break;

    // Damped multiplicative update, swept rootward (deepest periods first).
    std::vector<int> order(n_nodes);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return tree.nodes[static_cast<std::size_t>(a)].period >
             tree.nodes[static_cast<std::size_t>(b)].period;
    });
    for (int node : order) {
      const auto i = static_cast<std::size_t>(node);
      if (tree.is_terminal(node)) continue;
      const double gross = std::max(1.0 + res.residual[i], 1e-12);  // sum_j s_j
      double lambda = opts.damping;
      double next = fc.omega[i] * std::pow(gross, lambda);
      while ((next <= opts.omega_floor || next >= 1.0 - opts.omega_floor) &&
             lambda > 1e-6) {
        lambda *= 0.5;  // shrink the step before projecting
        next = fc.omega[i] * std::pow(gross, lambda);
      }
      if (next <= opts.omega_floor || next >= 1.0 - opts.omega_floor) {
        next = std::clamp(next, opts.omega_floor, 1.0 - opts.omega_floor);
        ++report.projections;
      }
      fc.omega[i] = next;
    }
  }
  return {std::move(fc), std::move(report)};
}

}  // namespace growthlab
