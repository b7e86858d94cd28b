#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "mad/nn/model.hpp"

namespace mad::nn {

// Little-endian layout:
//   "MADCKPT\0" | u32 version | u8 kind | u8 task (0 = none)
//   u32 hyperparameter count, then per entry:
//     u16 name length | name | u8 type (0 = f64, 1 = u64) | 8 value bytes
//   u32 parameter count, then per parameter:
//     u16 name length | name | u32 rank | u64 dims[rank] | f64 values
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const SequenceModel& model);
SequenceModel decode_checkpoint(std::string_view bytes,
                                std::optional<ModelKind> expected_kind = {});

void save_checkpoint(const SequenceModel& model,
                     const std::filesystem::path& path);
SequenceModel load_checkpoint(const std::filesystem::path& path,
                              std::optional<ModelKind> expected_kind = {});

}  // namespace mad::nn
