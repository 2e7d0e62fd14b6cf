#pragma once

#include <cstdint>
#include <string>

#include "fmpinn/network.hpp"

namespace fmpinn {

/// Flat binary checkpoint: 8-byte magic, config hash, parameter count,
/// little-endian doubles in layout order. A JSON sidecar (same path plus
/// ".shapes.json") describes the per-layer shapes.
void write_checkpoint(const std::string& path, const Parameters& params, std::uint64_t config_hash);

/// Reads a checkpoint for the given architecture. A nonzero expected_hash
/// must match the stored one.
Parameters read_checkpoint(const std::string& path, const NetworkConfig& cfg,
                           std::uint64_t expected_hash = 0);

}  // namespace fmpinn
