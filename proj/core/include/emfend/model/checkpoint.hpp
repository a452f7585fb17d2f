#pragma once

#include <memory>
#include <string>

#include "emfend/model/em_fend.hpp"

namespace emfend::model {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary checkpoint, little-endian throughout:
///   "EMFENDCK" | u32 version | u64 length + config JSON |
///   u32 count | per parameter (sorted by name):
///     u32 length + name | u8 trainable | u32 rank | u64 extents | f32 values
/// Values are written as 32-bit floats, so a model whose parameters are
/// already float32-representable round-trips bit for bit.
std::string serialize_checkpoint(const EmFend& model);
std::unique_ptr<EmFend> deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::string& path, const EmFend& model);
/// Throws DataError on a missing file, bad magic, unsupported version,
/// truncation, or parameters that do not match the echoed config.
std::unique_ptr<EmFend> load_checkpoint(const std::string& path);

}  // namespace emfend::model
