// Binary checkpoint container.
//
// Layout: magic "TNCK", uint32 version, uint64 header length, a JSON header
// (model config, config hash, seed, epoch, tensor names and shapes), then
// every tensor's entries as little-endian doubles in column-major order,
// tensors in for_each_tensor order.

#ifndef TENENCE_CHECKPOINT_HPP
#define TENENCE_CHECKPOINT_HPP

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "tenence/model.hpp"

namespace tenence {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::size_t epoch = 0;  // epoch whose parameters were kept; 0 = initialization
};

struct Checkpoint {
  ModelParameters params;
  CheckpointMeta meta;
};

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string serialize_checkpoint(const ModelParameters& params, const CheckpointMeta& meta);
Checkpoint deserialize_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const ModelParameters& params,
                     const CheckpointMeta& meta);
/// Throws CheckpointError on a missing, truncated or mismatched file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace tenence

#endif  // TENENCE_CHECKPOINT_HPP
