#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "kta/data/dataset.hpp"

namespace kta::data {

struct Partition {
  std::vector<std::vector<std::size_t>> client_shards;  // sorted indices into the parent
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::size_t repaired_moves = 0;  // indices moved by the starvation repair

  // C x K label histogram of the shards.
  std::vector<std::vector<std::size_t>> histogram(const Dataset& parent) const;
};

inline constexpr std::size_t kDefaultMinClientSamples = 4;

// Label-skewed split: every class is shuffled and cut contiguously across
// clients at the rounded cumulative proportions of a Dirichlet(alpha * 1_C)
// draw. Afterwards, while some shard holds fewer than min_client_samples
// indices, the lowest-numbered starved client receives one index from the
// largest shard (lowest client on ties), taken from that donor's
// most-represented class (lowest class on ties; highest index within it).
Partition dirichlet_partition(const Dataset& dataset, std::size_t clients, double alpha,
                              std::uint64_t seed,
                              std::size_t min_client_samples = kDefaultMinClientSamples);

struct ReferenceSet {
  Dataset dataset;
  std::vector<std::size_t> provenance;  // parent indices, in reference order

  std::vector<std::size_t> class_coverage() const { return dataset.class_counts(); }
};

struct Holdout {
  ReferenceSet reference;
  Dataset remainder;
  std::vector<std::size_t> remainder_indices;  // parent indices, ascending
};

// Uniform sample of n_ref rows without replacement; the rest is returned as
// the remainder.
Holdout holdout_reference(const Dataset& dataset, std::size_t n_ref, std::uint64_t seed);

}  // namespace kta::data
