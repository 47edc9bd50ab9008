#include "kta/federation/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "kta/common/error.hpp"

namespace kta::federation {

namespace {

constexpr char kMagic[8] = {'K', 'T', 'A', 'C', 'K', 'P', 'T', '\0'};

template <class T>
void put(std::string& out, T value) {
  std::uint64_t bits;
  if constexpr (std::is_same_v<T, double>)
    bits = std::bit_cast<std::uint64_t>(value);
  else
    bits = value;
  for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  template <class T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size())
      throw DataError("checkpoint: truncated at byte " + std::to_string(pos_));
    std::uint64_t bits = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b)
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + b])) << (8 * b);
    pos_ += sizeof(T);
    if constexpr (std::is_same_v<T, double>)
      return std::bit_cast<double>(bits);
    else
      return static_cast<T>(bits);
  }

  std::vector<double> vec() {
    const auto n = get<std::uint64_t>();
    if (n > (bytes_.size() - pos_) / 8)
      throw DataError("checkpoint: vector length " + std::to_string(n) + " at byte " +
                      std::to_string(pos_ - 8) + " exceeds the file");
    std::vector<double> out(n);
    for (double& v : out) v = get<double>();
    return out;
  }

  std::size_t pos() const { return pos_; }
  std::size_t size() const { return bytes_.size(); }
  const std::string& bytes() const { return bytes_; }
  void skip(std::size_t n) { pos_ += n; }

 private:
  std::string bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Checkpoint capture_checkpoint(const Federation& fed, std::uint64_t config_hash, std::uint64_t round) {
  Checkpoint c;
  c.config_hash = config_hash;
  c.round = round;
  for (const auto& client : fed.clients) {
    const auto p = client.model.parameters();
    c.client_params.emplace_back(p.begin(), p.end());
  }
  c.global_params = fed.global_params;
  return c;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, checkpoint.config_hash);
  put<std::uint64_t>(out, checkpoint.round);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(checkpoint.client_params.size()));
  auto vec = [&](const std::vector<double>& v) {
    put<std::uint64_t>(out, v.size());
    for (double x : v) put<double>(out, x);
  };
  for (const auto& p : checkpoint.client_params) vec(p);
  vec(checkpoint.global_params);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("checkpoint: cannot open " + path.string() + " for writing");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("checkpoint: write failed for " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("checkpoint: cannot open " + path.string());
  Reader r(std::string(std::istreambuf_iterator<char>(f), {}));
  if (r.size() < sizeof kMagic || std::memcmp(r.bytes().data(), kMagic, sizeof kMagic) != 0)
    throw DataError("checkpoint: bad magic at byte 0");
  r.skip(sizeof kMagic);
  if (const auto v = r.get<std::uint32_t>(); v != kCheckpointVersion)
    throw DataError("checkpoint: unsupported version " + std::to_string(v) + " at byte 8");
  Checkpoint c;
  c.config_hash = r.get<std::uint64_t>();
  c.round = r.get<std::uint64_t>();
  const auto clients = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < clients; ++i) c.client_params.push_back(r.vec());
  c.global_params = r.vec();
  if (r.pos() != r.size())
    throw DataError("checkpoint: " + std::to_string(r.size() - r.pos()) + " trailing bytes at byte " +
                    std::to_string(r.pos()));
  return c;
}

void restore_checkpoint(Federation& fed, const Checkpoint& checkpoint) {
  KTA_REQUIRE(checkpoint.client_params.size() == fed.clients.size(),
              "restore_checkpoint: client count mismatch");
  for (std::size_t i = 0; i < fed.clients.size(); ++i)
    KTA_REQUIRE(checkpoint.client_params[i].size() == fed.clients[i].model.parameter_count(),
                "restore_checkpoint: parameter length mismatch");
  KTA_REQUIRE(checkpoint.global_params.empty() ||
                  checkpoint.global_params.size() == fed.clients.front().model.parameter_count(),
              "restore_checkpoint: global parameter length mismatch");
  for (std::size_t i = 0; i < fed.clients.size(); ++i)
    fed.clients[i].model.set_parameters(checkpoint.client_params[i]);
  fed.global_params = checkpoint.global_params;
}

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace kta::federation
