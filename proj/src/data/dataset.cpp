#include "kta/data/dataset.hpp"

#include <cmath>
#include <string>

#include "kta/common/error.hpp"
#include "kta/common/rng.hpp"

namespace kta::data {

void Dataset::validate() const {
  KTA_REQUIRE(!labels.empty(), "Dataset: no rows");
  KTA_REQUIRE(labels.size() == features.rows(), "Dataset: label count != feature rows");
  KTA_REQUIRE(class_count >= 1, "Dataset: class_count must be positive");
  for (std::size_t i = 0; i < labels.size(); ++i)
    KTA_REQUIRE(labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < class_count,
                "Dataset: label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                    " outside [0, " + std::to_string(class_count) + ")");
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.features = features.gather_rows(indices);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.labels.push_back(labels[i]);
  out.class_count = class_count;
  return out;
}

std::vector<std::size_t> Dataset::class_counts() const {
  std::vector<std::size_t> counts(class_count, 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

Dataset synth_blobs(std::size_t classes, std::size_t dim, std::size_t per_class, double spread,
                    std::uint64_t seed) {
  KTA_REQUIRE(classes >= 2, "synth_blobs: need at least 2 classes");
  KTA_REQUIRE(dim >= 2, "synth_blobs: need at least 2 dimensions");
  KTA_REQUIRE(per_class >= 1, "synth_blobs: need at least 1 sample per class");
  KTA_REQUIRE(spread > 0.0 && std::isfinite(spread), "synth_blobs: spread must be > 0");

  Rng rng(derive_seed(seed, streams::kData));
  std::vector<std::vector<double>> centres(classes, std::vector<double>(dim, 0.0));
  for (std::size_t k = 0; k < classes; ++k) {
    if (k < dim) {
      centres[k][k] = 1.0;
      continue;
    }
    double norm = 0.0;
    for (auto& v : centres[k]) {
      v = rng.normal();
      norm += v * v;
    }
    for (auto& v : centres[k]) v /= std::sqrt(norm);
  }

  Dataset out;
  out.class_count = classes;
  out.features = nn::Tensor2(classes * per_class, dim);
  out.labels.resize(classes * per_class);
  for (std::size_t k = 0; k < classes; ++k) {
    for (std::size_t i = 0; i < per_class; ++i) {
      const std::size_t r = k * per_class + i;
      out.labels[r] = static_cast<int>(k);
      for (std::size_t j = 0; j < dim; ++j) out.features(r, j) = centres[k][j] + spread * rng.normal();
    }
  }
  return out;
}

}  // namespace kta::data
