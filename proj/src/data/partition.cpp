#include "kta/data/partition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "kta/common/error.hpp"
#include "kta/common/rng.hpp"

namespace kta::data {

std::vector<std::vector<std::size_t>> Partition::histogram(const Dataset& parent) const {
  std::vector<std::vector<std::size_t>> h(client_shards.size(),
                                          std::vector<std::size_t>(parent.class_count, 0));
  for (std::size_t c = 0; c < client_shards.size(); ++c)
    for (std::size_t idx : client_shards[c]) ++h[c][static_cast<std::size_t>(parent.labels[idx])];
  return h;
}

Partition dirichlet_partition(const Dataset& dataset, std::size_t clients, double alpha,
                              std::uint64_t seed, std::size_t min_client_samples) {
  KTA_REQUIRE(clients >= 2, "dirichlet_partition: need at least 2 clients");
  KTA_REQUIRE(alpha > 0.0 && std::isfinite(alpha), "dirichlet_partition: alpha must be > 0");
  dataset.validate();
  if (dataset.size() < clients * min_client_samples)
    throw ContractViolation("dirichlet_partition: infeasible min_client_samples=" +
                            std::to_string(min_client_samples) + " for " +
                            std::to_string(dataset.size()) + " rows over " +
                            std::to_string(clients) + " clients");

  Rng rng(derive_seed(seed, streams::kPartition));
  const std::size_t k = dataset.class_count;
  std::vector<std::vector<std::size_t>> by_class(k);
  for (std::size_t i = 0; i < dataset.size(); ++i)
    by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(i);

  Partition out;
  out.alpha = alpha;
  out.seed = seed;
  out.client_shards.assign(clients, {});
  for (auto& members : by_class) {
    rng.shuffle(members);
    const auto p = rng.dirichlet(alpha, clients);
    const double n = static_cast<double>(members.size());
    double cumulative = 0.0;
    std::size_t begin = 0;
    for (std::size_t c = 0; c < clients; ++c) {
      cumulative += p[c];
      std::size_t end = c + 1 == clients
                            ? members.size()
                            : std::min(members.size(), static_cast<std::size_t>(std::llround(cumulative * n)));
      end = std::max(end, begin);
      out.client_shards[c].insert(out.client_shards[c].end(), members.begin() + static_cast<std::ptrdiff_t>(begin),
                                  members.begin() + static_cast<std::ptrdiff_t>(end));
      begin = end;
    }
  }

  // Starvation repair.
  auto& shards = out.client_shards;
  for (;;) {
    std::size_t starved = clients;
    for (std::size_t c = 0; c < clients; ++c)
      if (shards[c].size() < min_client_samples) {
        starved = c;
        break;
      }
    if (starved == clients) break;
    std::size_t donor = 0;
    for (std::size_t c = 1; c < clients; ++c)
      if (shards[c].size() > shards[donor].size()) donor = c;
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t idx : shards[donor]) ++counts[static_cast<std::size_t>(dataset.labels[idx])];
    const auto cls = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    std::size_t pick = shards[donor].size();
    for (std::size_t pos = 0; pos < shards[donor].size(); ++pos)
      if (dataset.labels[shards[donor][pos]] == cls &&
          (pick == shards[donor].size() || shards[donor][pos] > shards[donor][pick]))
        pick = pos;
    shards[starved].push_back(shards[donor][pick]);
    shards[donor].erase(shards[donor].begin() + static_cast<std::ptrdiff_t>(pick));
    ++out.repaired_moves;
  }
  for (auto& s : shards) std::sort(s.begin(), s.end());
  return out;
}

Holdout holdout_reference(const Dataset& dataset, std::size_t n_ref, std::uint64_t seed) {
  dataset.validate();
  KTA_REQUIRE(n_ref >= 1, "holdout_reference: N_ref must be positive");
  KTA_REQUIRE(n_ref < dataset.size(),
              "holdout_reference: N_ref=" + std::to_string(n_ref) + " must be below n=" +
                  std::to_string(dataset.size()));
  Rng rng(derive_seed(seed, streams::kHoldout));
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  Holdout out;
  out.reference.provenance.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_ref));
  out.remainder_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_ref), order.end());
  std::sort(out.remainder_indices.begin(), out.remainder_indices.end());
  out.reference.dataset = dataset.subset(out.reference.provenance);
  out.remainder = dataset.subset(out.remainder_indices);
  return out;
}

}  // namespace kta::data
