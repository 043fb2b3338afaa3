#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "kgtc/models.hpp"

namespace kgtc {

/*
 * Checkpoint layout (version 1), all integers and doubles little-endian:
 *
 *   8 bytes   magic "KGTCCKPT"
 *   u32       format version
 *   u32       header length L
 *   L bytes   JSON header: model, shapes, hyperparameters, seed, config hash,
 *             regime, and the ordered tensor list [{name, rows, cols}]
 *   f64...    tensor payloads in header order, each row-major
 */
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  Hyperparams hp;
  std::string regime;
  std::string config_hash;
};

struct Checkpoint {
  ModelParams params;
  CheckpointMeta meta;
};

std::string serialize_checkpoint(const ModelParams& params, const CheckpointMeta& meta);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params, const CheckpointMeta& meta);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace kgtc
