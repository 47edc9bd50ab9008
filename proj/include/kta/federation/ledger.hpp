#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

namespace kta::federation {

inline constexpr std::uint64_t kBytesPerScalar = 4;

enum class Payload { params_up, params_down, logits_up, teacher_down };
inline constexpr std::array<Payload, 4> kAllPayloads{Payload::params_up, Payload::params_down,
                                                     Payload::logits_up, Payload::teacher_down};

std::string_view payload_name(Payload payload);
bool is_uplink(Payload payload);

enum class MeteringView { both, uplink_only };

struct LedgerEntry {
  std::size_t round = 0;
  std::size_t client = 0;
  Payload payload = Payload::params_up;
  std::uint64_t bytes = 0;

  friend bool operator==(const LedgerEntry&, const LedgerEntry&) = default;
};

// Exact integer byte accounting. One entry per (round, client, payload) that
// was actually sent; totals are plain integer sums.
class CommLedger {
 public:
  void record(std::size_t round, std::size_t client, Payload payload, std::uint64_t scalars);

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  void truncate(std::size_t size) { entries_.resize(size); }

  std::uint64_t total() const;
  std::uint64_t total(Payload payload) const;
  std::uint64_t total(MeteringView view) const;
  std::uint64_t uplink(std::size_t through_round) const;
  std::uint64_t downlink(std::size_t through_round) const;

  // Dense table: one row per (round, client, payload) for rounds 1..rounds
  // and clients 0..clients-1, zero where nothing was sent.
  void write_csv(std::ostream& out, std::size_t rounds, std::size_t clients,
                 std::uint64_t seed) const;
  static void write_csv_header(std::ostream& out);

  friend bool operator==(const CommLedger&, const CommLedger&) = default;

 private:
  std::vector<LedgerEntry> entries_;
};

double megabytes(std::uint64_t bytes);

}  // namespace kta::federation
