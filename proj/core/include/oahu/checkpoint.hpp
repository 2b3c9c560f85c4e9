#pragma once

#include <filesystem>
#include <string>
#include <utility>

#include "oahu/model.hpp"

namespace oahu {

// Binary layout (all little-endian):
//   "OAHU" | u32 version=1
//   u32 input_dim, hidden_layers, hidden_units, embedding_dim
//   f64 tau, beta, smoothing, learning_rate | u64 rng_seed
//   per matrix (W^(1..L) then Theta^(0..L)): u32 rows, u32 cols, rows*cols f64 row-major
//   u32 count, count f64 alpha
inline constexpr char kCheckpointMagic[4] = {'O', 'A', 'H', 'U'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const ParameterSet& params, const ModelConfig& config);
std::pair<ParameterSet, ModelConfig> deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const ParameterSet& params, const ModelConfig& config,
                     const std::filesystem::path& path);
std::pair<ParameterSet, ModelConfig> load_checkpoint(const std::filesystem::path& path);

}  // namespace oahu
