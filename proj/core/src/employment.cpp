#include "growthlab/employment.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace growthlab {

namespace {

// Largest-remainder apportionment of n slots to the support points of dist.
std::vector<int> apportion_counts(const EmploymentDistribution& dist, int n) {
  const std::size_t k = dist.support.size();
  std::vector<int> counts(k, 0);
  std::vector<std::pair<double, std::size_t>> rema(k);
  int assigned = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double ideal = dist.prob[i] * static_cast<double>(n);
    counts[i] = static_cast<int>(std::floor(ideal));
    assigned += counts[i];
    rema[i] = {ideal - std::floor(ideal), i};
  }
  std::sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;  // deterministic tie-break
  });
  for (int r = 0; r < n - assigned; ++r) counts[rema[static_cast<std::size_t>(r)].second]++;
  return counts;
}

}  // namespace

std::vector<double> draw_employment(const EventTree& tree, int child_node,
                                    const std::vector<int>& class_of,
                                    EmploymentMode mode, RngStream& rng,
                                    int retry_cap) {
  if (child_node <= 0 || child_node >= static_cast<int>(tree.nodes.size()))
    throw std::invalid_argument("draw_employment: child_node must be a non-root node");
  const std::size_t n = class_of.size();
  std::vector<double> shares(n, 0.0);

  if (mode == EmploymentMode::exact_fraction) {
    for (std::size_t cl = 0; cl < tree.classes.size(); ++cl) {
      std::vector<std::size_t> members;
      for (std::size_t j = 0; j < n; ++j)
        if (class_of[j] == static_cast<int>(cl)) members.push_back(j);
      if (members.empty()) continue;
      const auto& dist = tree.classes[cl].edge_dist[static_cast<std::size_t>(child_node)];
      const auto counts = apportion_counts(dist, static_cast<int>(members.size()));
      // Fisher-Yates on the member list, then deal support values in blocks.
      for (std::size_t i = members.size(); i > 1; --i) {
        const std::size_t j = rng.next_below(i);
        std::swap(members[i - 1], members[j]);
      }
      std::size_t pos = 0;
      for (std::size_t i = 0; i < counts.size(); ++i)
        for (int c = 0; c < counts[i]; ++c) shares[members[pos++]] = dist.support[i];
    }
  } else {
    for (int attempt = 0;; ++attempt) {
      bool any_positive = false;
      bool positive_possible = false;
      for (std::size_t j = 0; j < n; ++j) {
        const auto& dist =
            tree.classes[static_cast<std::size_t>(class_of[j])]
                .edge_dist[static_cast<std::size_t>(child_node)];
        double u = rng.next_double();
        double share = dist.support.back();
        for (std::size_t i = 0; i < dist.prob.size(); ++i) {
          if (dist.support[i] > 0.0 && dist.prob[i] > 0.0) positive_possible = true;
          if (u < dist.prob[i]) {
            share = dist.support[i];
            break;
          }
          u -= dist.prob[i];
        }
        shares[j] = share;
        if (share > 0.0) any_positive = true;
      }
      if (any_positive || !positive_possible) break;
      if (attempt >= retry_cap)
        throw std::runtime_error(
            "draw_employment: all-unemployed draw persisted past the retry cap");
    }
  }

  // Distribute the whole wage bill: scale positive shares so they sum to 1.
  const double total = std::accumulate(shares.begin(), shares.end(), 0.0);
  if (total > 0.0)
    for (double& s : shares) s /= total;
  return shares;
}

}  // namespace growthlab
