#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "acrl/netpolicy.hpp"

namespace acrl {

// Binary snapshot layout, all integers and floats little-endian:
//   "ACRL" | u32 format_version | u32 policy_version
//   u32 actor layer count | (u32 in, u32 out) per layer
//   u32 critic layer count | (u32 in, u32 out) per layer
//   u32 action dim
//   f32 weights: actor W (row-major) and b per layer, critic likewise, log_std
//   u64 actor Adam step | f32 actor first moments | f32 actor second moments
//   u64 critic Adam step | f32 critic first moments | f32 critic second moments
//   u32 CRC-32 of everything above
// Moments follow the same tensor order and row-major element order as the
// weights (actor group ends with log_std).

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

struct CheckpointData {
  PolicyParameters params;
  OptimizerState opt;
};

std::vector<std::uint8_t> serialize_checkpoint(const PolicyParameters& p,
                                               const OptimizerState& opt);
CheckpointData deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::string& path, const PolicyParameters& p,
                     const OptimizerState& opt);
CheckpointData load_checkpoint(const std::string& path);

// CRC of the parameters serialized with a fresh zero optimizer; used to
// detect mutation of pooled snapshots.
std::uint32_t policy_crc(const PolicyParameters& p);

}  // namespace acrl
