#include "kta/federation/ledger.hpp"

#include <cstdint>
#include <map>
#include <ostream>
#include <tuple>

namespace kta::federation {

std::string_view payload_name(Payload payload) {
  switch (payload) {
    case Payload::params_up: return "params_up";
    case Payload::params_down: return "params_down";
    case Payload::logits_up: return "logits_up";
    case Payload::teacher_down: return "teacher_down";
  }
  return "?";
}

bool is_uplink(Payload payload) {
  return payload == Payload::params_up || payload == Payload::logits_up;
}

void CommLedger::record(std::size_t round, std::size_t client, Payload payload,
                        std::uint64_t scalars) {
  entries_.push_back({round, client, payload, scalars * kBytesPerScalar});
}

std::uint64_t CommLedger::total() const {
  std::uint64_t sum = 0;
  for (const auto& e : entries_) sum += e.bytes;
  return sum;
}

std::uint64_t CommLedger::total(Payload payload) const {
  std::uint64_t sum = 0;
  for (const auto& e : entries_)
    if (e.payload == payload) sum += e.bytes;
  return sum;
}

std::uint64_t CommLedger::total(MeteringView view) const {
  return view == MeteringView::both ? total() : uplink(SIZE_MAX);
}

std::uint64_t CommLedger::uplink(std::size_t through_round) const {
  std::uint64_t sum = 0;
  for (const auto& e : entries_)
    if (e.round <= through_round && is_uplink(e.payload)) sum += e.bytes;
  return sum;
}

std::uint64_t CommLedger::downlink(std::size_t through_round) const {
  std::uint64_t sum = 0;
  for (const auto& e : entries_)
    if (e.round <= through_round && !is_uplink(e.payload)) sum += e.bytes;
  return sum;
}

void CommLedger::write_csv_header(std::ostream& out) {
  out << "seed,round,client_id,payload,bytes\n";
}

void CommLedger::write_csv(std::ostream& out, std::size_t rounds, std::size_t clients,
                           std::uint64_t seed) const {
  std::map<std::tuple<std::size_t, std::size_t, Payload>, std::uint64_t> dense;
  for (const auto& e : entries_) dense[{e.round, e.client, e.payload}] += e.bytes;
  for (std::size_t r = 1; r <= rounds; ++r)
    for (std::size_t c = 0; c < clients; ++c)
      for (Payload p : kAllPayloads) {
        auto it = dense.find({r, c, p});
        out << seed << ',' << r << ',' << c << ',' << payload_name(p) << ','
            << (it == dense.end() ? 0 : it->second) << '\n';
      }
}

double megabytes(std::uint64_t bytes) { return static_cast<double>(bytes) / 1e6; }

}  // namespace kta::federation
