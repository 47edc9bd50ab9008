#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "kta/common/error.hpp"
#include "kta/data/dataset.hpp"

namespace kta::data {

namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<double> flat;
  std::vector<int> labels;
  std::size_t width = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      ++col;
      const std::string t = trim(cell);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": column " +
                        std::to_string(col) + ": not a finite number: '" + t + "'");
      fields.push_back(v);
    }
    if (fields.size() < 2)
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": need at least one feature and a label");
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": ragged row (" +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(width) + ")");
    const double y = fields.back();
    if (y < 0.0 || y != std::floor(y) || y > 1e9)
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": label must be a non-negative integer");
    labels.push_back(static_cast<int>(y));
    flat.insert(flat.end(), fields.begin(), fields.end() - 1);
  }
  if (labels.empty()) throw DataError(path.string() + ": empty file");
  Dataset out;
  out.class_count = static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
  out.features = nn::Tensor2(labels.size(), width - 1, std::move(flat));
  out.labels = std::move(labels);
  return out;
}

struct IdxHeader {
  unsigned char type = 0;
  std::vector<std::size_t> dims;
  std::size_t payload_offset = 0;
};

IdxHeader parse_idx_header(const std::vector<unsigned char>& bytes, const std::string& name) {
  if (bytes.size() < 4) throw DataError(name + ": truncated IDX header at offset 0");
  if (bytes[0] != 0 || bytes[1] != 0)
    throw DataError(name + ": bad IDX magic at offset 0 (first two bytes must be zero)");
  IdxHeader h;
  h.type = bytes[2];
  const std::size_t ndim = bytes[3];
  if (ndim != 1 && ndim != 3)
    throw DataError(name + ": unsupported IDX rank " + std::to_string(ndim) +
                    " at offset 3 (only 1-D and 3-D)");
  if (bytes.size() < 4 + 4 * ndim) throw DataError(name + ": truncated IDX dimensions at offset 4");
  for (std::size_t d = 0; d < ndim; ++d) {
    const std::size_t o = 4 + 4 * d;
    h.dims.push_back((std::size_t{bytes[o]} << 24) | (std::size_t{bytes[o + 1]} << 16) |
                     (std::size_t{bytes[o + 2]} << 8) | std::size_t{bytes[o + 3]});
  }
  h.payload_offset = 4 + 4 * ndim;
  return h;
}

std::size_t idx_element_size(unsigned char type, const std::string& name) {
  switch (type) {
    case 0x08:
    case 0x09: return 1;
    case 0x0B: return 2;
    case 0x0C:
    case 0x0D: return 4;
    case 0x0E: return 8;
    default: throw DataError(name + ": unknown IDX element type at offset 2");
  }
}

double idx_element(const unsigned char* p, unsigned char type) {
  std::uint64_t raw = 0;
  const std::size_t width = type == 0x0B ? 2 : (type == 0x0C || type == 0x0D) ? 4 : 8;
  if (type == 0x08) return static_cast<double>(p[0]);
  if (type == 0x09) return static_cast<double>(static_cast<signed char>(p[0]));
  for (std::size_t i = 0; i < width; ++i) raw = (raw << 8) | p[i];
  switch (type) {
    case 0x0B: return static_cast<double>(static_cast<std::int16_t>(raw));
    case 0x0C: return static_cast<double>(static_cast<std::int32_t>(raw));
    case 0x0D: {
      const auto bits = static_cast<std::uint32_t>(raw);
      float f;
      std::memcpy(&f, &bits, sizeof f);
      return static_cast<double>(f);
    }
    default: {
      double d;
      std::memcpy(&d, &raw, sizeof d);
      return d;
    }
  }
}

}  // namespace

nn::Tensor2 read_idx_tensor(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  const std::string name = path.string();
  const IdxHeader h = parse_idx_header(bytes, name);
  const std::size_t elem = idx_element_size(h.type, name);
  const std::size_t rows = h.dims[0];
  std::size_t cols = 1;
  for (std::size_t d = 1; d < h.dims.size(); ++d) cols *= h.dims[d];
  const std::size_t need = h.payload_offset + rows * cols * elem;
  if (rows == 0) throw DataError(name + ": IDX file holds no samples");
  if (bytes.size() < need)
    throw DataError(name + ": truncated IDX payload at offset " + std::to_string(bytes.size()) +
                    " (expected " + std::to_string(need) + " bytes)");
  if (bytes.size() > need)
    throw DataError(name + ": trailing bytes after IDX payload at offset " + std::to_string(need));
  std::vector<double> flat(rows * cols);
  const double scale = h.type == 0x08 ? 1.0 / 255.0 : 1.0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    flat[i] = idx_element(bytes.data() + h.payload_offset + i * elem, h.type) * scale;
    if (!std::isfinite(flat[i]))
      throw DataError(name + ": non-finite value at offset " +
                      std::to_string(h.payload_offset + i * elem));
  }
  return nn::Tensor2(rows, cols, std::move(flat));
}

std::vector<int> read_idx_labels(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  const std::string name = path.string();
  const IdxHeader h = parse_idx_header(bytes, name);
  if (h.dims.size() != 1) throw DataError(name + ": label file must be 1-D IDX");
  if (h.type != 0x08 && h.type != 0x09 && h.type != 0x0B && h.type != 0x0C)
    throw DataError(name + ": label file must hold integer elements");
  const std::size_t elem = idx_element_size(h.type, name);
  const std::size_t need = h.payload_offset + h.dims[0] * elem;
  if (bytes.size() != need)
    throw DataError(name + ": label payload size mismatch at offset " +
                    std::to_string(std::min(bytes.size(), need)));
  std::vector<int> labels(h.dims[0]);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double v = idx_element(bytes.data() + h.payload_offset + i * elem, h.type);
    if (v < 0)
      throw DataError(name + ": negative label at offset " +
                      std::to_string(h.payload_offset + i * elem));
    labels[i] = static_cast<int>(v);
  }
  return labels;
}

Dataset load_numeric(const std::filesystem::path& path, FileFormat format,
                     const std::filesystem::path& labels_path) {
  if (format == FileFormat::csv) return load_csv(path);
  if (labels_path.empty()) throw DataError(path.string() + ": IDX input needs a label file");
  Dataset out;
  out.features = read_idx_tensor(path);
  out.labels = read_idx_labels(labels_path);
  if (out.labels.size() != out.features.rows())
    throw DataError(labels_path.string() + ": " + std::to_string(out.labels.size()) +
                    " labels for " + std::to_string(out.features.rows()) + " samples");
  out.class_count = static_cast<std::size_t>(*std::max_element(out.labels.begin(), out.labels.end())) + 1;
  return out;
}

}  // namespace kta::data
