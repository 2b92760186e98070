#ifndef SMOOTH_POLICY_CHECKPOINT_H_
#define SMOOTH_POLICY_CHECKPOINT_H_

#include <filesystem>
#include <string>

#include "smooth/policy/networks.h"

namespace smooth {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ActorNetwork actor;
  CriticNetwork critic;
  std::string config_hash;
};

// JSON document with the network configs, every parameter's shape and its
// values. Doubles are written in shortest round-trip form, so loading
// reproduces the parameters bit for bit.
std::string serialize_checkpoint(const ActorNetwork& actor,
                                 const CriticNetwork& critic,
                                 const std::string& config_hash);
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const std::filesystem::path& path,
                     const ActorNetwork& actor, const CriticNetwork& critic,
                     const std::string& config_hash);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// FNV-1a over the bit patterns of all parameters, in order.
std::string parameter_hash(const std::vector<const Tensor*>& params);

}  // namespace smooth

#endif  // SMOOTH_POLICY_CHECKPOINT_H_
