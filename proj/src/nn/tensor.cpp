#include "kta/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kta/common/error.hpp"

namespace kta::nn {

Tensor2::Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  KTA_REQUIRE(data_.size() == rows_ * cols_,
              "Tensor2: data length " + std::to_string(data_.size()) + " != " +
                  std::to_string(rows_) + "x" + std::to_string(cols_));
  KTA_REQUIRE(all_finite(), "Tensor2: non-finite entry");
}

Tensor2 Tensor2::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.front().size();
  std::vector<double> flat;
  flat.reserve(r * c);
  for (const auto& row : rows) {
    KTA_REQUIRE(row.size() == c, "Tensor2::from_rows: ragged rows");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return Tensor2(r, c, std::move(flat));
}

Tensor2 Tensor2::identity(std::size_t n) {
  Tensor2 t(n, n);
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

bool Tensor2::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor2 Tensor2::gather_rows(std::span<const std::size_t> indices) const {
  Tensor2 out(indices.size(), cols_);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    KTA_REQUIRE(indices[i] < rows_, "gather_rows: index out of range");
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(indices[i] * cols_), cols_,
                out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
  }
  return out;
}

}  // namespace kta::nn
