#include "growthlab/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace growthlab {

SimulationPanel simulate_paths(const EventTree& tree, const EconomyParams& params,
                               const Forecasts& forecasts, const NodeAggregates& agg,
                               const std::vector<const Policy*>& policies,
                               const PopulationState& root_pop,
                               const SimulationOptions& opts) {
  root_pop.validate(tree.classes.size());
  if (policies.size() != tree.classes.size())
    throw std::invalid_argument("simulate_paths: one policy per class required");
  if (opts.n_paths < 1) throw std::invalid_argument("simulate_paths: n_paths must be >= 1");

  const std::size_t n = root_pop.size();
  SimulationPanel panel;
  panel.rng_name = std::string(RngStream::kName);
  panel.seed = opts.seed;
  std::vector<PanelNodeStat> stats(tree.nodes.size());
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) stats[i].node = static_cast<int>(i);

  for (int path = 0; path < opts.n_paths; ++path) {
    int node = tree.root();
    std::vector<double> omegas = root_pop.omega;
    std::vector<double> employment(n, 0.0);  // period-1 employment is embedded in omega
    for (int period = 1;; ++period) {
      const auto i = static_cast<std::size_t>(node);
      const bool terminal = tree.is_terminal(node);
      const double w_base = agg.wealth_base[i];

      std::vector<double> invest_shares(n, 0.0);
      double total_shares = 0.0;
      double total_consumption = 0.0;
      double total_wealth = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const Policy& pol = *policies[static_cast<std::size_t>(root_pop.class_of[j])];
        double s = 0.0;
        double consumption;
        if (terminal) {
          consumption = omegas[j] * w_base;  // last period: consume everything
        } else {
          bool clamped = false;
          const double g = pol.eval(node, omegas[j], &clamped);
          if (clamped && omegas[j] < pol.grids[i].points.front())
            ++panel.below_floor_evals;
          s = g * omegas[j] / forecasts.omega[i];
          consumption = (omegas[j] - s * forecasts.omega[i]) * w_base;
        }
        invest_shares[j] = s;
        total_shares += s;
        total_consumption += consumption;
        total_wealth += omegas[j];
        panel.rows.push_back(PanelRow{path, period, node, static_cast<int>(j),
                                      tree.nodes[i].shock, agg.output[i], 0.0,
                                      employment[j], omegas[j], s, consumption});
      }
      const double capital_next =
          terminal ? 0.0 : total_shares * forecasts.omega[i] * w_base;
      for (std::size_t j = 0; j < n; ++j)
        panel.rows[panel.rows.size() - n + j].capital_next = capital_next;

      // Goods accounting: consumption plus savings exhausts agent wealth.
      panel.max_accounting_gap =
          std::max(panel.max_accounting_gap,
                   std::abs(total_consumption + capital_next - total_wealth * w_base));

      if (!terminal) {
        stats[i].visits++;
        const double excess = total_shares - 1.0;
        stats[i].mean_excess += excess;
        stats[i].max_abs_excess = std::max(stats[i].max_abs_excess, std::abs(excess));
      }
      if (terminal) break;

      // Draw the aggregate branch, then the employment realization.
      RngStream branch_rng(opts.seed, static_cast<std::uint64_t>(path),
                           static_cast<std::uint64_t>(period) * 2ULL);
      const TreeNode& nd = tree.nodes[i];
      int child = nd.children.back();
      if (nd.children.size() > 1) {
        double u = branch_rng.next_double();
        for (std::size_t b = 0; b < nd.children.size(); ++b) {
          if (u < nd.child_prob[b]) {
            child = nd.children[b];
            break;
          }
          u -= nd.child_prob[b];
        }
      }
      RngStream emp(opts.seed, static_cast<std::uint64_t>(path),
                    static_cast<std::uint64_t>(period) * 2ULL + 1ULL);
      employment = draw_employment(tree, child, root_pop.class_of, opts.mode, emp,
                                   opts.retry_cap);

      // Each agent's share of realized aggregate investment; the cross
      // section stays an exact partition of next-period effective output.
      const double ws = agg.wage_scale[static_cast<std::size_t>(child)];
      for (std::size_t j = 0; j < n; ++j) {
        const double portion =
            total_shares > 0.0 ? invest_shares[j] / total_shares : 0.0;
        omegas[j] = wealth_transition(portion, employment[j] * ws, params.alpha);
      }
      node = child;
    }
  }

  for (const auto& st : stats) {
    if (st.visits == 0) continue;
    PanelNodeStat out = st;
    out.mean_excess /= static_cast<double>(st.visits);
    panel.node_stats.push_back(out);
  }
  return panel;
}

std::string panel_to_csv(const SimulationPanel& panel) {
  std::string out =
      "path,period,node,agent,z,Y,K_next,employment,omega,invest_share,consumption\n";
  char line[320];
  for (const auto& r : panel.rows) {
    std::snprintf(line, sizeof line,
                  "%d,%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.path,
                  r.period, r.node, r.agent, r.shock, r.output, r.capital_next,
                  r.employment, r.omega, r.invest_share, r.consumption);
    out += line;
  }
  return out;
}

}  // namespace growthlab
