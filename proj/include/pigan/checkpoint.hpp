#pragma once

#include <string>

#include "pigan/gan.hpp"

namespace pigan {

// Binary checkpoint ("PIGANCKPT"). Little-endian throughout; the exact byte
// layout is documented in docs/formats.md. Version mismatches and truncated
// files raise FormatError.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const TrainedState& state);
TrainedState load_checkpoint(const std::string& path);

}  // namespace pigan
