#ifndef SMOOTH_HARNESS_CONFIG_H_
#define SMOOTH_HARNESS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "smooth/envs/tasks.h"
#include "smooth/ppo/ppo.h"
#include "smooth/smoothing/regularizers.h"

namespace smooth {

struct EvaluationConfig {
  std::size_t episodes = 10;
  std::uint64_t seed = 10000;

  friend bool operator==(const EvaluationConfig&,
                         const EvaluationConfig&) = default;
};

// One experiment: a method (named by `name`) trained once per seed.
//
//   [experiment]   name, output, seeds
//   [environment]  name plus environment keys (dt, sigma_xi, horizon, ...)
//   [ppo]          PpoConfig fields except seed
//   [regularizer]  spatial, temporal, lambda_s, lambda_p, lambda_t,
//                  caps_sigma, eps_t
//   [evaluation]   episodes, seed
struct ExperimentConfig {
  std::string name = "experiment";
  std::filesystem::path output = "runs";
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::string env_name = "point_mass";
  EnvSettings env_settings;
  PpoConfig ppo;
  RegularizerSpec regularizer;
  EvaluationConfig evaluation;

  std::unique_ptr<Environment> make_env() const {
    return make_environment(env_name, env_settings);
  }
  EnvFactory env_factory() const;

  friend bool operator==(const ExperimentConfig&,
                         const ExperimentConfig&) = default;
};

// Throws ConfigError carrying the line and key of the first problem.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical text form; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

// 16 hex digits over the canonical form without output and seeds, so runs of
// one setup share a directory whatever seeds they use.
std::string config_hash(const ExperimentConfig& config);

}  // namespace smooth

#endif  // SMOOTH_HARNESS_CONFIG_H_
