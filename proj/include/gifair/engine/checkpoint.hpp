#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "gifair/engine/engine.hpp"

namespace gifair {

/// Server state plus, for personalized runs, every client's personal model.
struct Checkpoint {
  RoundState state;
  std::optional<std::vector<ParamVector>> personal;
};

/// Binary layout (little-endian) is documented in docs/formats.md. Throws
/// IoError on open/write failure.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);

/// Throws IoError on a truncated or malformed file.
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace gifair
