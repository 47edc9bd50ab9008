#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "kta/nn/tensor.hpp"

namespace kta::data {

struct Dataset {
  nn::Tensor2 features;
  std::vector<int> labels;
  std::size_t class_count = 0;

  // Throws ContractViolation unless labels match rows, every label lies in
  // [0, class_count), and there is at least one row.
  void validate() const;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.cols(); }

  Dataset subset(std::span<const std::size_t> indices) const;
  std::vector<std::size_t> class_counts() const;
};

// K Gaussian clusters in d dimensions with isotropic noise `spread`. Class k
// is centred on the unit basis vector e_k when K <= d; beyond that the
// centres are seeded random unit directions.
Dataset synth_blobs(std::size_t classes, std::size_t dim, std::size_t per_class, double spread,
                    std::uint64_t seed);

enum class FileFormat { csv, idx };

// CSV: comma separated, no header, label in the last column, K inferred as
// max label + 1. IDX: `path` holds the feature tensor (first dimension is the
// sample axis) and `labels_path` a 1-D IDX label file; unsigned-byte
// features are rescaled to [0, 1]. Errors are DataError with line or byte
// offsets.
Dataset load_numeric(const std::filesystem::path& path, FileFormat format,
                     const std::filesystem::path& labels_path = {});

// Raw IDX tensor reader: returns the first dimension as rows and the product
// of the remaining dimensions as columns.
nn::Tensor2 read_idx_tensor(const std::filesystem::path& path);
std::vector<int> read_idx_labels(const std::filesystem::path& path);

}  // namespace kta::data
