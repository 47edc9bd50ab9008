#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "kta/federation/federation.hpp"

namespace kta::federation {

// Round-state checkpoint, all integers and doubles little-endian:
//
//   offset 0   8 bytes  magic "KTACKPT\0"
//          8   u32      format version (1)
//         12   u64      config hash
//         20   u64      round index
//         28   u32      client count C
//         32   C blocks of { u64 length P_i, P_i x f64 parameters }
//              u64 length G, G x f64 global parameters (G = 0 when unused)
//
// BatchNorm buffers and optimizer moments are not stored.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint64_t config_hash = 0;
  std::uint64_t round = 0;
  std::vector<std::vector<double>> client_params;
  std::vector<double> global_params;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

Checkpoint capture_checkpoint(const Federation& fed, std::uint64_t config_hash, std::uint64_t round);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
// DataError on a bad magic, version, truncation or trailing bytes.
Checkpoint read_checkpoint(const std::filesystem::path& path);
// Installs the stored parameters; ContractViolation when the shapes differ.
void restore_checkpoint(Federation& fed, const Checkpoint& checkpoint);

// 64-bit FNV-1a, used to tie checkpoints to a config dump.
std::uint64_t fnv1a64(std::string_view text);

}  // namespace kta::federation
