#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ahmca/model.hpp"

namespace ahmca {

inline constexpr std::string_view kCheckpointMagic = "AHMCAMDL";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct ManifestEntry {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::uint64_t offset = 0;  // bytes from the start of the array payload
};

/// Container layout: magic, u32 LE version, u64 LE metadata length, UTF-8
/// JSON metadata, then every array as LE float32 in manifest order.
std::string save_checkpoint(const Checkpoint& ckpt);

/// Throws BadMagic, VersionMismatch or CorruptPayload.
Checkpoint load_checkpoint(std::string_view bytes);

/// The metadata JSON of a container, validated only as far as the header.
std::string checkpoint_metadata(std::string_view bytes);

std::vector<ManifestEntry> checkpoint_manifest(std::string_view bytes);

}  // namespace ahmca
