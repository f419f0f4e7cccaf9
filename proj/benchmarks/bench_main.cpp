// Microbenchmarks for the hot paths: policy solves, clearing residuals,
// wealth binning, and interpolant evaluation.

#include <benchmark/benchmark.h>

#include <vector>

#include "growthlab/aggregation.hpp"
#include "growthlab/auctioneer.hpp"
#include "growthlab/bounds.hpp"
#include "growthlab/grid.hpp"
#include "growthlab/solver.hpp"

using namespace growthlab;

namespace {

struct Setup {
  EventTree tree;
  EconomyParams params;
  Forecasts forecasts;
  NodeAggregates agg;
  Policy policy;
  PopulationState pop;

  explicit Setup(int horizon, int n_agents, double sigma = 1.0) {
    ProcessSpec spec;
    spec.kind = ProcessSpec::Kind::uniform_employment;
    spec.uniform.unemployment_rate = 0.1;
    tree = build_event_tree(spec, horizon, n_agents);
    params.sigma = sigma;
    params.horizon = horizon;
    params.n_agents = n_agents;
    forecasts.omega = gamma_upper_bound_log(tree, params);
    for (const TreeNode& n : tree.nodes)
      if (tree.is_terminal(n.id)) forecasts.omega[static_cast<std::size_t>(n.id)] = 0.0;
    agg = propagate_aggregates(tree, params, forecasts);
    AgentProblem pb{&tree, &params, &forecasts, &agg, 0};
    policy = solve_policy(pb).first;

    pop.class_of.assign(static_cast<std::size_t>(n_agents), 0);
    const double total = 0.5 * n_agents * (n_agents + 1.0);
    for (int j = 1; j <= n_agents; ++j) pop.omega.push_back(j / total);
  }
};

void bm_solve_policy(benchmark::State& state) {
  Setup s(static_cast<int>(state.range(0)), 10, 2.0);
  AgentProblem pb{&s.tree, &s.params, &s.forecasts, &s.agg, 0};
  for (auto _ : state) {
    auto [policy, rep] = solve_policy(pb);
    benchmark::DoNotOptimize(policy.gamma[0].back());
    benchmark::DoNotOptimize(rep.max_residual);
  }
}
BENCHMARK(bm_solve_policy)->Arg(2)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

void bm_clearing_residuals(benchmark::State& state) {
  Setup s(3, static_cast<int>(state.range(0)));
  const std::vector<const Policy*> views{&s.policy};
  for (auto _ : state) {
    const ClearingResiduals res =
        clearing_residuals(s.tree, s.params, s.forecasts, s.agg, s.pop, views);
    benchmark::DoNotOptimize(res.residual[0]);
  }
}
BENCHMARK(bm_clearing_residuals)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void bm_bin_agents(benchmark::State& state) {
  Setup s(2, static_cast<int>(state.range(0)));
  const std::vector<const Policy*> views{&s.policy};
  for (auto _ : state) {
    const Binning bins = bin_agents(s.pop, views, s.agg, 0, 0.01);
    benchmark::DoNotOptimize(bins.bins.size());
  }
}
BENCHMARK(bm_bin_agents)->Arg(100)->Arg(1000)->Arg(10000)->Unit(benchmark::kMicrosecond);

void bm_policy_eval(benchmark::State& state) {
  Setup s(3, 10);
  const auto& grid = s.policy.grids[0];
  const double lo = grid.min(), hi = grid.max();
  double omega = lo;
  const double step = (hi - lo) / 257.0;
  for (auto _ : state) {
    omega += step;
    if (omega > hi) omega = lo;
    benchmark::DoNotOptimize(s.policy.eval(0, omega));
  }
}
BENCHMARK(bm_policy_eval);

}  // namespace

BENCHMARK_MAIN();
